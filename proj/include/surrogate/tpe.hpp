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
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "surrogate/random.hpp"

namespace surrogate {

/// Conditional network search space: depth L in {2, 3}; widths N1, N2 always
/// active; N3 active only for L = 3 (recorded as 0 otherwise); learning rate
/// uniform on [lr_lower, lr_upper].
struct SearchSpace {
  std::vector<int> depths{2, 3};
  std::vector<std::size_t> widths{10, 20, 40, 60, 80, 100};
  double lr_lower = 0.001;
  double lr_upper = 0.1;
};

struct Hyperparams {
  int depth = 2;
  std::size_t n1 = 10;
  std::size_t n2 = 10;
  std::size_t n3 = 0;
  double lr = 0.01;

  std::vector<std::size_t> hidden_widths() const;
  bool operator==(const Hyperparams&) const = default;
};

bool is_valid(const Hyperparams& params, const SearchSpace& space);

struct Trial {
  std::size_t index = 0;
  Hyperparams params;
  double objective = std::numeric_limits<double>::infinity();  ///< +inf for failed trials
  std::uint64_t seed = 0;
  double duration_seconds = 0.0;
};

struct TpeConfig {
  std::size_t n_trials = 100;
  double gamma = 0.25;
  std::size_t n_startup = 20;
  std::size_t n_ei_candidates = 24;
  std::uint64_t seed = 0;

  void validate() const;
};

Hyperparams sample_random(const SearchSpace& space, Rng& rng);

struct HistorySplit {
  std::vector<Trial> good;
  std::vector<Trial> bad;
};

/// The ceil(gamma * N) lowest-objective trials are "good"; ties go to the
/// earlier trial index, failed (+inf) trials sort last.
HistorySplit split_history(std::span<const Trial> history, double gamma);

/// Next configuration: random during startup, otherwise the best of
/// n_ei_candidates draws from the good-trial density by l(x) / g(x).
Hyperparams suggest(std::span<const Trial> history, const SearchSpace& space, const TpeConfig& config, Rng& rng);

/// Objective evaluated per trial; receives the trial seed.
using Objective = std::function<double(const Hyperparams&, std::uint64_t trial_seed)>;

struct TuningResult {
  Trial best;
  std::vector<Trial> history;
};

/// Sequential suggest -> evaluate -> append loop. Exceptions thrown by the
/// objective and non-finite values are recorded as failed trials.
TuningResult run_tuning(const Objective& objective, const SearchSpace& space, const TpeConfig& config);

/// Pure random search with the same seeding as run_tuning.
TuningResult run_random_search(const Objective& objective, const SearchSpace& space, std::size_t n_trials,
                               std::uint64_t seed);

/// Trial history CSV: index,L,N1,N2,N3,lr,objective,duration.
void save_history_csv(const std::filesystem::path& path, std::span<const Trial> history);

}  // namespace surrogate
