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


#include "surrogate/pipeline.hpp"

#include <fmt/format.h>

#include <chrono>
#include <stdexcept>

#include "surrogate/error.hpp"

namespace surrogate {

Hyperparams default_hyperparams() { return Hyperparams{2, 10, 10, 0, 0.01}; }

void PipelineConfig::validate() const {
  if (rank && target_fraction) throw std::invalid_argument("set either a rank or a target fraction, not both");
  if (mode == SurrogateMode::kDirect && (rank || target_fraction)) {
    throw std::invalid_argument("direct mode does not use an SVD rank");
  }
  train.validate();
  if (!fixed) tpe.validate();
}

BuildResult build_surrogate(const DesignMatrix& design, const OutputMatrix& outputs, const PipelineConfig& config) {
  config.validate();
  if (design.rows() != outputs.rows()) {
    throw DataError(fmt::format("{} design rows but {} output rows", design.rows(), outputs.rows()));
  }
  const auto start = std::chrono::steady_clock::now();

  std::optional<SvdBasis> basis;
  Eigen::MatrixXd targets;
  if (config.mode == SurrogateMode::kReduced) {
    const Eigen::Index max_rank = std::min(outputs.rows(), outputs.cols());
    Eigen::Index k = config.rank.value_or(5);
    if (config.target_fraction) {
      // The full spectrum is needed to pick k; a rank-1 pass provides it.
      k = select_k(truncated_svd(outputs.values(), 1).basis, *config.target_fraction, config.info_mode);
    }
    if (k < 1 || k > max_rank) throw std::invalid_argument(fmt::format("rank {} outside [1, {}]", k, max_rank));
    basis = truncated_svd(outputs.values(), k).basis;
    targets = project(outputs.values(), *basis);
  } else {
    targets = outputs.values();
  }

  auto arch_for = [&](const Hyperparams& hp) {
    return MlpArchitecture{static_cast<std::size_t>(design.cols()), hp.hidden_widths(),
                           static_cast<std::size_t>(targets.cols())};
  };
  auto config_for = [&](const Hyperparams& hp, std::uint64_t seed) {
    TrainConfig tc = config.train;
    tc.learning_rate = hp.lr;
    tc.seed = seed;
    return tc;
  };

  BuildResult out{.bundle = SurrogateBundle{.mode = config.mode,
                                            .index_map = outputs.index_map(),
                                            .basis = std::move(basis),
                                            .model = MlpModel{{}, {}, NormStats{design.space(), {}, {}}},
                                            .hyperparams = {},
                                            .train_seed = 0,
                                            .tuning_seed = std::nullopt,
                                            .created = {}},
                  .report = {},
                  .history = {},
                  .seconds = 0.0};
  auto& bundle = out.bundle;

  if (config.fixed) {
    auto result = train(arch_for(*config.fixed), design, targets, config_for(*config.fixed, config.train.seed));
    bundle.model = std::move(result.model);
    bundle.hyperparams = *config.fixed;
    bundle.train_seed = config.train.seed;
    out.report = std::move(result.report);
  } else {
    std::optional<TrainResult> best;
    Hyperparams best_params;
    std::uint64_t best_seed = 0;
    const Objective objective = [&](const Hyperparams& hp, std::uint64_t seed) {
      auto result = train(arch_for(hp), design, targets, config_for(hp, seed));
      const double value = result.report.best_val_loss;
      if (!best || value < best->report.best_val_loss) {
        best = std::move(result);
        best_params = hp;
        best_seed = seed;
      }
      return value;
    };
    auto tuning = run_tuning(objective, config.search, config.tpe);
    if (!best) {
      throw DivergenceError(fmt::format("all {} tuning trials diverged", config.tpe.n_trials), 0, 0.0);
    }
    bundle.model = std::move(best->model);
    bundle.hyperparams = best_params;
    bundle.train_seed = best_seed;
    bundle.tuning_seed = config.tpe.seed;
    out.report = std::move(best->report);
    out.history = std::move(tuning.history);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace surrogate
