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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "surrogate/dataset.hpp"
#include "surrogate/mlp.hpp"
#include "surrogate/svd_compress.hpp"
#include "surrogate/tpe.hpp"

namespace surrogate {

enum class SurrogateMode {
  kReduced,  ///< network predicts SVD scores, outputs are reconstructed
  kDirect,   ///< network predicts every output column
};

/// A trained surrogate: fully determines predictions for new parameter rows.
struct SurrogateBundle {
  static constexpr int kFormatVersion = 1;

  SurrogateMode mode = SurrogateMode::kReduced;
  OutputIndexMap index_map{1, 1};
  std::optional<SvdBasis> basis;  ///< present for kReduced
  MlpModel model;
  Hyperparams hyperparams;
  std::uint64_t train_seed = 0;
  std::optional<std::uint64_t> tuning_seed;
  std::string created;  ///< ISO-8601 timestamp, manifest only

  /// q x n outputs for q raw parameter rows.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& raw_inputs, std::size_t* out_of_range_rows = nullptr) const;
};

/// Writes `dir/manifest.json` plus one ".smx" file per array. Each array's
/// FNV-1a 64 checksum is recorded in the manifest.
void save_bundle(const std::filesystem::path& dir, const SurrogateBundle& bundle);

/// Throws DataError on a missing file, checksum mismatch, unknown format
/// version or inconsistent dims.
SurrogateBundle load_bundle(const std::filesystem::path& dir);

std::uint64_t fnv1a64(const std::filesystem::path& path);

}  // namespace surrogate
