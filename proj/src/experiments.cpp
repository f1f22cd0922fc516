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


#include "surrogate/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "surrogate/error.hpp"

namespace surrogate {

SeedPlan SeedPlan::from(std::uint64_t seed, std::size_t m_train) {
  return {derive_seed(seed, 100 + m_train), derive_seed(seed, 2), derive_seed(seed, 3), derive_seed(seed, 4)};
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

PipelineConfig reduced_config(const ExperimentOptions& options, Eigen::Index rank, std::uint64_t seed,
                              std::size_t m_train) {
  const auto plan = SeedPlan::from(seed, m_train);
  PipelineConfig config;
  config.mode = SurrogateMode::kReduced;
  config.rank = rank;
  config.train = options.train;
  config.train.seed = plan.train;
  if (options.tune) {
    config.tpe = options.tpe;
    config.tpe.seed = plan.tuning;
    config.search = options.search;
  } else {
    config.fixed = options.hyperparams;
  }
  return config;
}

CaseOutcome run_case(const SynthModel& model, const ParameterSpace& domain, const SynthDataset& test,
                     std::size_t m_train, std::uint64_t seed, const PipelineConfig& config) {
  const auto plan = SeedPlan::from(seed, m_train);
  CaseOutcome row;
  row.domain = domain == model.space() ? "full" : "viable";
  row.mode = config.mode;
  row.seed = seed;
  row.m_train = m_train;
  row.rank = config.mode == SurrogateMode::kReduced ? config.rank.value_or(5) : 0;
  if (config.fixed) {
    row.hidden = config.fixed->hidden_widths();
    row.lr = config.fixed->lr;
  }

  const auto train_set = generate_dataset(model, domain, m_train, plan.train_design);
  try {
    const auto built = build_surrogate(train_set.design, train_set.outputs, config);
    row.hidden = built.bundle.model.arch.hidden_widths;
    row.lr = built.bundle.hyperparams.lr;
    row.parameters = built.bundle.model.arch.parameter_count();
    row.train_seconds = built.seconds;
    const auto report = evaluate(test.outputs, built.bundle.predict(test.design.values()));
    row.r2 = report.overall_r2;
    row.r2_pooled = report.overall_r2_pooled;
    row.mse = report.overall_mse;
    row.worst_location_r2 = std::numeric_limits<double>::infinity();
    for (double v : report.per_location_r2) {
      if (!std::isnan(v)) row.worst_location_r2 = std::min(row.worst_location_r2, v);
    }
  } catch (const DivergenceError&) {
    row.diverged = true;
    row.r2 = row.r2_pooled = row.mse = row.worst_location_r2 = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

namespace {

SynthDataset test_set(const SynthModel& model, const ParameterSpace& domain, const ExperimentOptions& options,
                      std::uint64_t seed) {
  return generate_dataset(model, domain, options.m_test, SeedPlan::from(seed, 0).test_design);
}

std::string hidden_text(const std::vector<std::size_t>& hidden) { return fmt::format("{}", fmt::join(hidden, "x")); }

}  // namespace

ExperimentTable run_case_compare(const ExperimentOptions& options) {
  const auto model = SynthModel::build(options.synth);
  ExperimentTable table{"case-compare", {}};
  for (const auto seed : options.seeds) {
    const auto test = test_set(model, model.space(), options, seed);

    auto reduced = run_case(model, model.space(), test, options.m_train, seed,
                            reduced_config(options, options.rank, seed, options.m_train));
    reduced.label = "case1";
    const auto case1_hidden = reduced.hidden;
    const double case1_lr = reduced.lr;
    table.rows.push_back(reduced);

    // Direct mode reuses Case I's architecture and learning rate.
    PipelineConfig direct;
    direct.mode = SurrogateMode::kDirect;
    direct.train = options.train;
    direct.train.seed = SeedPlan::from(seed, options.m_train).train;
    Hyperparams same = options.hyperparams;
    same.depth = static_cast<int>(case1_hidden.size());
    same.n1 = case1_hidden.at(0);
    same.n2 = case1_hidden.at(1);
    same.n3 = case1_hidden.size() == 3 ? case1_hidden[2] : 0;
    same.lr = case1_lr;
    direct.fixed = same;
    auto narrow = run_case(model, model.space(), test, options.m_train, seed, direct);
    narrow.label = "case2";
    table.rows.push_back(narrow);

    Hyperparams wide = same;
    wide.depth = static_cast<int>(options.direct_wide_hidden.size());
    wide.n1 = options.direct_wide_hidden.at(0);
    wide.n2 = options.direct_wide_hidden.at(1);
    wide.n3 = options.direct_wide_hidden.size() == 3 ? options.direct_wide_hidden[2] : 0;
    direct.fixed = wide;
    for (const auto m : options.direct_sizes) {
      direct.train.seed = SeedPlan::from(seed, m).train;
      auto row = run_case(model, model.space(), test, m, seed, direct);
      row.label = "case2-wide";
      table.rows.push_back(row);
    }
  }
  return table;
}

ExperimentTable run_ntrain_sweep(const ExperimentOptions& options) {
  const auto model = SynthModel::build(options.synth);
  ExperimentTable table{"ntrain-sweep", {}};
  for (const auto seed : options.seeds) {
    const auto test = test_set(model, model.space(), options, seed);
    for (const auto m : options.sweep_sizes) {
      auto row = run_case(model, model.space(), test, m, seed, reduced_config(options, options.rank, seed, m));
      row.label = fmt::format("m={}", m);
      table.rows.push_back(row);
    }
  }
  return table;
}

ExperimentTable run_subdomain(const ExperimentOptions& options) {
  const auto model = SynthModel::build(options.synth);
  ExperimentTable table{"subdomain", {}};
  for (const auto seed : options.seeds) {
    for (const auto& domain : {model.space(), model.viable_space()}) {
      const auto test = test_set(model, domain, options, seed);
      auto row = run_case(model, domain, test, options.m_train, seed,
                          reduced_config(options, options.rank, seed, options.m_train));
      row.label = row.domain;
      table.rows.push_back(row);
    }
  }
  return table;
}

ExperimentTable run_svd_sweep(const ExperimentOptions& options) {
  const auto model = SynthModel::build(options.synth);
  ExperimentTable table{"svd-sweep", {}};
  for (const auto seed : options.seeds) {
    const auto test = test_set(model, model.space(), options, seed);
    for (const auto k : options.sweep_ranks) {
      if (k > static_cast<Eigen::Index>(options.m_train)) continue;
      auto row = run_case(model, model.space(), test, options.m_train, seed, reduced_config(options, k, seed, options.m_train));
      row.label = fmt::format("K={}", k);
      table.rows.push_back(row);
    }
  }
  return table;
}

ExperimentTable run_experiment(const std::string& name, const ExperimentOptions& options) {
  if (name == "case-compare") return run_case_compare(options);
  if (name == "ntrain-sweep") return run_ntrain_sweep(options);
  if (name == "subdomain") return run_subdomain(options);
  if (name == "svd-sweep") return run_svd_sweep(options);
  throw std::invalid_argument(fmt::format("unknown experiment '{}'", name));
}

std::string ExperimentTable::to_csv() const {
  std::string s = "experiment,label,domain,mode,seed,m_train,rank,hidden,lr,parameters,diverged,r2,r2_pooled,mse,worst_location_r2\n";
  for (const auto& r : rows) {
    s += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", name, r.label, r.domain,
                     r.mode == SurrogateMode::kReduced ? "reduced" : "direct", r.seed, r.m_train, r.rank,
                     hidden_text(r.hidden), r.lr, r.parameters, r.diverged ? 1 : 0, r.r2, r.r2_pooled, r.mse,
                     r.worst_location_r2);
  }
  return s;
}

std::string ExperimentTable::to_text() const {
  std::string s = fmt::format("{:<12} {:<7} {:<8} {:>6} {:>7} {:>5} {:>9} {:>8} {:>9} {:>9} {:>10}\n", "label", "domain",
                              "mode", "seed", "m_train", "K", "hidden", "lr", "r2", "worst_loc", "train_s");
  for (const auto& r : rows) {
    s += fmt::format("{:<12} {:<7} {:<8} {:>6} {:>7} {:>5} {:>9} {:>8.4f} {:>9} {:>9} {:>10.2f}\n", r.label, r.domain,
                     r.mode == SurrogateMode::kReduced ? "reduced" : "direct", r.seed, r.m_train, r.rank,
                     hidden_text(r.hidden), r.lr, r.diverged ? std::string("diverged") : fmt::format("{:.4f}", r.r2),
                     r.diverged ? std::string("-") : fmt::format("{:.4f}", r.worst_location_r2), r.train_seconds);
  }
  return s;
}

}  // namespace surrogate
