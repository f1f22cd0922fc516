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

#include <cstdint>
#include <string>
#include <vector>

#include "surrogate/pipeline.hpp"
#include "surrogate/synth_esm.hpp"

namespace surrogate {

/// Settings shared by the scripted comparisons on the synthetic benchmark.
struct ExperimentOptions {
  SynthConfig synth;
  std::size_t m_train = 20;
  std::size_t m_test = 1000;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  Eigen::Index rank = 5;
  TrainConfig train;
  Hyperparams hyperparams = default_hyperparams();
  /// Tune Case I with TPE instead of using `hyperparams`.
  bool tune = false;
  TpeConfig tpe;
  SearchSpace search;

  std::vector<std::size_t> sweep_sizes{20, 200, 1000};
  std::vector<Eigen::Index> sweep_ranks{1, 5, 10, 15, 20};
  /// Wide direct-mode networks trained at these sizes in case-compare.
  std::vector<std::size_t> direct_sizes{50, 100, 200};
  std::vector<std::size_t> direct_wide_hidden{100, 100};
};

struct CaseOutcome {
  std::string label;
  std::string domain;  ///< "full" or "viable"
  SurrogateMode mode = SurrogateMode::kReduced;
  std::uint64_t seed = 0;
  std::size_t m_train = 0;
  Eigen::Index rank = 0;
  std::vector<std::size_t> hidden;
  double lr = 0.0;
  std::size_t parameters = 0;
  bool diverged = false;
  double r2 = 0.0;
  double r2_pooled = 0.0;
  double mse = 0.0;
  double worst_location_r2 = 0.0;
  double train_seconds = 0.0;
};

struct ExperimentTable {
  std::string name;
  std::vector<CaseOutcome> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Seed layout: the benchmark model uses options.synth.seed; every
/// experiment seed s derives its own train design, test design and
/// training/tuning streams from s.
struct SeedPlan {
  std::uint64_t train_design;
  std::uint64_t test_design;
  std::uint64_t train;
  std::uint64_t tuning;

  static SeedPlan from(std::uint64_t seed, std::size_t m_train);
};

/// Builds one surrogate on a fresh training design and scores it on `test`.
CaseOutcome run_case(const SynthModel& model, const ParameterSpace& domain, const SynthDataset& test,
                     std::size_t m_train, std::uint64_t seed, const PipelineConfig& config);

PipelineConfig reduced_config(const ExperimentOptions& options, Eigen::Index rank, std::uint64_t seed,
                              std::size_t m_train);

ExperimentTable run_case_compare(const ExperimentOptions& options);
ExperimentTable run_ntrain_sweep(const ExperimentOptions& options);
ExperimentTable run_subdomain(const ExperimentOptions& options);
ExperimentTable run_svd_sweep(const ExperimentOptions& options);

/// Dispatches by name: case-compare, ntrain-sweep, subdomain, svd-sweep.
ExperimentTable run_experiment(const std::string& name, const ExperimentOptions& options);

/// Median of the r2 column over rows matching a predicate.
template <typename Pred>
double median_r2(const ExperimentTable& table, Pred pred);

double median(std::vector<double> values);

template <typename Pred>
double median_r2(const ExperimentTable& table, Pred pred) {
  std::vector<double> v;
  for (const auto& row : table.rows) {
    if (pred(row)) v.push_back(row.r2);
  }
  return median(std::move(v));
}

}  // namespace surrogate
