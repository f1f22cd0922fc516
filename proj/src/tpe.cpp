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


#include "surrogate/tpe.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "surrogate/error.hpp"

namespace surrogate {

std::vector<std::size_t> Hyperparams::hidden_widths() const {
  if (depth == 3) return {n1, n2, n3};
  return {n1, n2};
}

bool is_valid(const Hyperparams& p, const SearchSpace& space) {
  auto has = [](const auto& set, auto v) { return std::find(set.begin(), set.end(), v) != set.end(); };
  if (!has(space.depths, p.depth)) return false;
  if (!has(space.widths, p.n1) || !has(space.widths, p.n2)) return false;
  if (p.depth == 3 ? !has(space.widths, p.n3) : p.n3 != 0) return false;
  return p.lr >= space.lr_lower && p.lr <= space.lr_upper;
}

void TpeConfig::validate() const {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (n_startup > n_trials) throw std::invalid_argument("n_startup must not exceed n_trials");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0, 1)");
  if (n_ei_candidates < 1) throw std::invalid_argument("n_ei_candidates must be >= 1");
}

Hyperparams sample_random(const SearchSpace& space, Rng& rng) {
  Hyperparams p;
  p.depth = space.depths[rng.index(space.depths.size())];
  p.n1 = space.widths[rng.index(space.widths.size())];
  p.n2 = space.widths[rng.index(space.widths.size())];
  p.n3 = p.depth == 3 ? space.widths[rng.index(space.widths.size())] : 0;
  p.lr = std::min(space.lr_upper, rng.uniform(space.lr_lower, space.lr_upper));
  return p;
}

HistorySplit split_history(std::span<const Trial> history, double gamma) {
  std::vector<Trial> sorted(history.begin(), history.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Trial& a, const Trial& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.index < b.index;
  });
  const auto n_good = std::min(sorted.size(), static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(sorted.size()) - 1e-12)));
  HistorySplit split;
  split.good.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n_good));
  split.bad.assign(sorted.begin() + static_cast<std::ptrdiff_t>(n_good), sorted.end());
  // Restore chronological order within each group.
  auto by_index = [](const Trial& a, const Trial& b) { return a.index < b.index; };
  std::sort(split.good.begin(), split.good.end(), by_index);
  std::sort(split.bad.begin(), split.bad.end(), by_index);
  return split;
}

namespace {

/// Add-one smoothed categorical over a fixed choice list.
template <typename T>
class CategoricalDensity {
 public:
  CategoricalDensity(const std::vector<T>& choices, const std::vector<T>& observed)
      : choices_(choices), weights_(choices.size(), 1.0) {
    for (const auto& v : observed) {
      const auto it = std::find(choices_.begin(), choices_.end(), v);
      if (it != choices_.end()) weights_[static_cast<std::size_t>(it - choices_.begin())] += 1.0;
    }
    total_ = static_cast<double>(choices_.size() + observed.size());
  }

  double log_pdf(const T& v) const {
    const auto it = std::find(choices_.begin(), choices_.end(), v);
    return std::log(weights_[static_cast<std::size_t>(it - choices_.begin())] / total_);
  }

  T sample(Rng& rng) const {
    double u = rng.uniform() * total_;
    for (std::size_t i = 0; i < choices_.size(); ++i) {
      if (u < weights_[i]) return choices_[i];
      u -= weights_[i];
    }
    return choices_.back();
  }

 private:
  std::vector<T> choices_;
  std::vector<double> weights_;
  double total_ = 0.0;
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Equal-weight mixture of a uniform prior over [lower, upper] and Gaussians
/// truncated to the same interval, centered at the observations.
class ParzenDensity {
 public:
  ParzenDensity(double lower, double upper, std::vector<double> observed) : lower_(lower), upper_(upper) {
    std::sort(observed.begin(), observed.end());
    const double range = upper - lower;
    const double floor = 0.02 * range;
    for (std::size_t i = 0; i < observed.size(); ++i) {
      double width = range;
      if (observed.size() > 1) {
        const double left = i > 0 ? observed[i] - observed[i - 1] : 0.0;
        const double right = i + 1 < observed.size() ? observed[i + 1] - observed[i] : 0.0;
        width = std::max(left, right);
      }
      width = std::clamp(width, floor, range);
      const double mass = normal_cdf((upper - observed[i]) / width) - normal_cdf((lower - observed[i]) / width);
      components_.push_back({observed[i], width, mass});
    }
  }

  double log_pdf(double x) const {
    const double range = upper_ - lower_;
    double density = 1.0 / range;
    for (const auto& c : components_) {
      const double z = (x - c.mu) / c.sigma;
      density += std::exp(-0.5 * z * z) / (c.sigma * std::sqrt(2.0 * std::numbers::pi) * c.mass);
    }
    return std::log(density / static_cast<double>(components_.size() + 1));
  }

  double sample(Rng& rng) const {
    const std::size_t pick = rng.index(components_.size() + 1);
    if (pick == components_.size()) return std::min(upper_, rng.uniform(lower_, upper_));
    const auto& c = components_[pick];
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double x = c.mu + c.sigma * rng.normal();
      if (x >= lower_ && x <= upper_) return x;
    }
    return std::clamp(c.mu, lower_, upper_);
  }

 private:
  struct Component {
    double mu;
    double sigma;
    double mass;  // probability of the untruncated Gaussian inside [lower, upper]
  };
  double lower_;
  double upper_;
  std::vector<Component> components_;
};

struct JointDensity {
  CategoricalDensity<int> depth;
  CategoricalDensity<std::size_t> n1;
  CategoricalDensity<std::size_t> n2;
  CategoricalDensity<std::size_t> n3;  // fitted on depth-3 trials only
  ParzenDensity lr;

  static JointDensity fit(const std::vector<Trial>& trials, const SearchSpace& space) {
    std::vector<int> depths;
    std::vector<std::size_t> n1s, n2s, n3s;
    std::vector<double> lrs;
    for (const auto& t : trials) {
      depths.push_back(t.params.depth);
      n1s.push_back(t.params.n1);
      n2s.push_back(t.params.n2);
      if (t.params.depth == 3) n3s.push_back(t.params.n3);
      lrs.push_back(t.params.lr);
    }
    return JointDensity{{space.depths, depths},
                        {space.widths, n1s},
                        {space.widths, n2s},
                        {space.widths, n3s},
                        {space.lr_lower, space.lr_upper, lrs}};
  }

  double log_pdf(const Hyperparams& p) const {
    double v = depth.log_pdf(p.depth) + n1.log_pdf(p.n1) + n2.log_pdf(p.n2) + lr.log_pdf(p.lr);
    if (p.depth == 3) v += n3.log_pdf(p.n3);
    return v;
  }

  Hyperparams sample(Rng& rng) const {
    Hyperparams p;
    p.depth = depth.sample(rng);
    p.n1 = n1.sample(rng);
    p.n2 = n2.sample(rng);
    p.n3 = p.depth == 3 ? n3.sample(rng) : 0;
    p.lr = lr.sample(rng);
    return p;
  }
};

}  // namespace

Hyperparams suggest(std::span<const Trial> history, const SearchSpace& space, const TpeConfig& config, Rng& rng) {
  if (history.size() < config.n_startup || history.empty()) return sample_random(space, rng);

  const auto split = split_history(history, config.gamma);
  const auto good = JointDensity::fit(split.good, space);
  const auto bad = JointDensity::fit(split.bad, space);

  Hyperparams best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < config.n_ei_candidates; ++c) {
    const Hyperparams candidate = good.sample(rng);
    const double score = good.log_pdf(candidate) - bad.log_pdf(candidate);
    if (c == 0 || score > best_score) {
      best = candidate;
      best_score = score;
    }
  }
  return best;
}

namespace {

Trial evaluate_trial(const Objective& objective, const Hyperparams& params, std::size_t index, std::uint64_t seed) {
  Trial trial;
  trial.index = index;
  trial.params = params;
  trial.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const double value = objective(params, seed);
    trial.objective = std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
  } catch (const std::exception&) {
    trial.objective = std::numeric_limits<double>::infinity();
  }
  trial.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trial;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t index) { return derive_seed(derive_seed(seed, 1), index); }

Trial pick_best(const std::vector<Trial>& history) {
  const auto it = std::min_element(history.begin(), history.end(),
                                   [](const Trial& a, const Trial& b) { return a.objective < b.objective; });
  return *it;
}

}  // namespace

TuningResult run_tuning(const Objective& objective, const SearchSpace& space, const TpeConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, 0));
  TuningResult result;
  result.history.reserve(config.n_trials);
  for (std::size_t i = 0; i < config.n_trials; ++i) {
    const Hyperparams params = suggest(result.history, space, config, rng);
    result.history.push_back(evaluate_trial(objective, params, i, trial_seed(config.seed, i)));
  }
  result.best = pick_best(result.history);
  return result;
}

TuningResult run_random_search(const Objective& objective, const SearchSpace& space, std::size_t n_trials,
                               std::uint64_t seed) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  Rng rng(derive_seed(seed, 0));
  TuningResult result;
  for (std::size_t i = 0; i < n_trials; ++i) {
    result.history.push_back(evaluate_trial(objective, sample_random(space, rng), i, trial_seed(seed, i)));
  }
  result.best = pick_best(result.history);
  return result;
}

void save_history_csv(const std::filesystem::path& path, std::span<const Trial> history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "index,L,N1,N2,N3,lr,objective,duration\n";
  for (const auto& t : history) {
    out << fmt::format("{},{},{},{},{},{},{},{:.6f}\n", t.index, t.params.depth, t.params.n1, t.params.n2, t.params.n3,
                       t.params.lr, t.objective, t.duration_seconds);
  }
}

}  // namespace surrogate
