// Copyright 2026 The svd-surrogate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "surrogate/bundle.hpp"
#include "surrogate/dataset.hpp"
#include "surrogate/metrics.hpp"
#include "surrogate/mlp.hpp"
#include "surrogate/svd_compress.hpp"
#include "surrogate/tpe.hpp"

namespace surrogate {

/// How to build a surrogate from (design, outputs).
struct PipelineConfig {
  SurrogateMode mode = SurrogateMode::kReduced;
  /// Exactly one of rank / target_fraction may be set; neither means rank 5.
  std::optional<Eigen::Index> rank;
  std::optional<double> target_fraction;
  InfoMode info_mode = InfoMode::kPlainSum;
  /// Epochs, patience, split and seed; learning_rate comes from the hyperparams.
  TrainConfig train;
  /// Fixed architecture and learning rate; when empty, TPE tunes them.
  std::optional<Hyperparams> fixed;
  TpeConfig tpe;
  SearchSpace search;

  void validate() const;
};

struct BuildResult {
  SurrogateBundle bundle;
  TrainReport report;
  std::vector<Trial> history;  ///< empty for fixed hyperparams
  double seconds = 0.0;
};

/// Decompose (reduced mode), train fixed or tuned networks, keep the best.
BuildResult build_surrogate(const DesignMatrix& design, const OutputMatrix& outputs, const PipelineConfig& config);

/// Defaults used when nothing else is requested: 2 x 10 hidden units, lr 0.01.
Hyperparams default_hyperparams();

}  // namespace surrogate
