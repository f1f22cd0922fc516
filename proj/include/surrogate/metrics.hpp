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

#include <filesystem>
#include <optional>
#include <vector>

#include "surrogate/dataset.hpp"

namespace surrogate {

/// Coefficient of determination 1 - SSE / SST, with the mean taken over y.
/// Empty when SST is zero (R^2 undefined).
std::optional<double> r2_score(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yhat);

double mse(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yhat);

struct EvalReport {
  double overall_mse = 0.0;
  /// Pooled MSE after scaling each defined column by its truth std.
  double overall_mse_standardized = 0.0;
  /// Mean of the defined per-output scores.
  double overall_r2 = 0.0;
  /// 1 - total SSE / total SST over the defined columns.
  double overall_r2_pooled = 0.0;
  /// NaN where undefined (zero-variance truth column).
  std::vector<double> per_output_r2;
  std::vector<double> per_location_r2;
  std::vector<double> per_year_r2;
  std::vector<std::size_t> skipped_outputs;
  std::vector<std::size_t> location_defined_count;
};

/// Per-output R^2 over the q samples of each column, aggregated per location
/// (mean over years) and per year (mean over locations). Zero-variance truth
/// columns are listed in skipped_outputs and left out of every mean.
EvalReport evaluate(const OutputMatrix& truth, const Eigen::MatrixXd& pred);

/// Aggregates already computed per-output scores (NaN = undefined).
void aggregate_r2(EvalReport& report, const OutputIndexMap& index_map);

/// Writes per_output.csv, per_location.csv, per_year.csv and summary.txt.
void save_report(const std::filesystem::path& dir, const EvalReport& report, const OutputIndexMap& index_map);

std::string format_summary(const EvalReport& report);

}  // namespace surrogate
