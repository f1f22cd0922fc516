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


#include "surrogate/synth_esm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json_util.hpp"
#include "surrogate/error.hpp"
#include "surrogate/parallel.hpp"
#include "surrogate/random.hpp"

namespace surrogate {
namespace {

// Coefficient ranges of the latent family. output_cap() is derived from these,
// so it holds for every seed.
constexpr double kAmplitude = 1.5;      // per-unit-loading scale of the leading latent
constexpr double kAmplitudeDecay = 0.5;
constexpr double kLeadOffset = 1.0;
constexpr double kLeadViability = 1.5;  // weight of parameter 0 in the leading latent
constexpr double kLinearMax = 0.4;      // |linear| for the leading latent's other dims
constexpr double kTrailingLinearMax = 0.2;
constexpr double kProductMax = 0.1;
constexpr double kDecayMax = 0.1;
constexpr double kSaturationMax = 0.1;
constexpr double kColdRamp = 0.5;  // width of the recovery above the threshold
constexpr double kOwnWeight = 1.0;  // weight of latent j on parameter j
constexpr double kBaseLevel = 0.15;
constexpr double kProfileMax = 1.7 * 1.1;  // max of the leading loading before normalization

// Sensitivity of the outputs to each parameter falls off geometrically with
// the parameter index, so a few parameters dominate.
constexpr double kSensitivityDecay = 0.2;

double sensitivity(std::size_t i) { return std::pow(kSensitivityDecay, static_cast<double>(i)); }

double latent_bound(std::size_t j, std::size_t d, double amplitude) {
  double linear = j == 0 ? kLeadViability : kOwnWeight;
  for (std::size_t i = j == 0 ? 1 : 0; i < d; ++i) {
    linear += (j == 0 ? kLinearMax : kTrailingLinearMax) * sensitivity(i);
  }
  return amplitude * ((j == 0 ? kLeadOffset : 0.0) + linear + kProductMax + kDecayMax + kSaturationMax);
}

}  // namespace

void SynthConfig::validate() const {
  if (d < 1) throw std::invalid_argument("synthetic model needs d >= 1");
  if (n_loc < 1 || n_year < 1) throw std::invalid_argument("synthetic model needs n_loc, n_year >= 1");
  if (rank < 1 || rank > d) throw std::invalid_argument(fmt::format("latent rank {} outside [1, d={}]", rank, d));
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must be in (0, 1)");
  if (!(cold_fraction >= 0.0 && cold_fraction <= 1.0)) throw std::invalid_argument("cold_fraction must be in [0, 1]");
}

SynthModel SynthModel::build(const SynthConfig& config) {
  config.validate();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < config.d; ++i) names.push_back(fmt::format("p{}", i));
  SynthModel model(config, ParameterSpace::unit_cube(names));

  Rng rng(derive_seed(config.seed, 0x5e));
  const auto n_loc = config.n_loc;
  const auto n_year = config.n_year;
  const auto n = static_cast<Eigen::Index>(n_loc * n_year);
  const auto r = static_cast<Eigen::Index>(config.rank);
  const double two_pi = 2.0 * std::numbers::pi;
  auto position = [&](std::size_t loc) { return n_loc > 1 ? static_cast<double>(loc) / static_cast<double>(n_loc - 1) : 0.0; };

  // Leading profile: positive, slowly varying across locations.
  const double lead_phase = rng.uniform(0.0, two_pi);
  const double lead_ripple = rng.uniform(0.0, two_pi);
  auto lead_profile = [&](double s) {
    return 1.0 + 0.5 * std::cos(std::numbers::pi * s + lead_phase) + 0.2 * std::cos(3.0 * std::numbers::pi * s + lead_ripple);
  };

  model.loadings_.resize(n, r);
  double lead_norm = 1.0;
  for (Eigen::Index j = 0; j < r; ++j) {
    double amp[3], phase[3];
    for (int h = 0; h < 3; ++h) {
      amp[h] = rng.uniform(-1.0, 1.0);
      phase[h] = rng.uniform(0.0, two_pi);
    }
    const double period = rng.uniform(3.0, 12.0);
    const double time_phase = rng.uniform(0.0, two_pi);
    const double swing = j == 0 ? 0.1 : 0.5;
    for (std::size_t loc = 0; loc < n_loc; ++loc) {
      const double s = position(loc);
      double profile = 0.0;
      if (j == 0) {
        profile = lead_profile(s);
      } else {
        for (int h = 0; h < 3; ++h) {
          profile += amp[h] * std::cos(std::numbers::pi * static_cast<double>(h + 1) * s * (0.5 + 0.5 * static_cast<double>(j)) + phase[h]);
        }
      }
      for (std::size_t t = 0; t < n_year; ++t) {
        const double season = 1.0 + swing * std::sin(two_pi * static_cast<double>(t) / period + time_phase);
        model.loadings_(static_cast<Eigen::Index>(loc * n_year + t), j) = profile * season;
      }
    }
    const double norm = model.loadings_.col(j).norm();
    if (j == 0) lead_norm = norm;
    if (norm > 0.0) model.loadings_.col(j) /= norm;
  }

  // The base field lies along the leading loading.
  model.base_ = kBaseLevel * lead_norm * model.loadings_.col(0);

  // Cold locations form one contiguous band of the location index.
  model.cold_.assign(n_loc, false);
  const auto n_cold = static_cast<std::size_t>(std::floor(config.cold_fraction * static_cast<double>(n_loc) + 1e-9));
  const std::size_t start = rng.index(n_loc);
  for (std::size_t i = 0; i < n_cold; ++i) model.cold_[(start + i) % n_loc] = true;

  const auto d = static_cast<Eigen::Index>(config.d);
  const double scale = std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < config.rank; ++j) {
    Latent g;
    g.amplitude = kAmplitude * scale * std::pow(kAmplitudeDecay, static_cast<double>(j));
    g.linear.resize(d);
    if (j == 0) {
      g.offset = kLeadOffset;
      g.linear(0) = kLeadViability;
      for (Eigen::Index i = 1; i < d; ++i) g.linear(i) = rng.uniform(0.0, kLinearMax) * sensitivity(static_cast<std::size_t>(i));
    } else {
      for (Eigen::Index i = 0; i < d; ++i) {
        g.linear(i) = rng.uniform(-kTrailingLinearMax, kTrailingLinearMax) * sensitivity(static_cast<std::size_t>(i));
      }
      g.linear(static_cast<Eigen::Index>(j % config.d)) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * kOwnWeight;
    }
    g.product = rng.uniform(j == 0 ? 0.0 : -kProductMax, kProductMax);
    const std::size_t dominant = std::min<std::size_t>(3, config.d);
    g.product_a = rng.index(dominant);
    g.product_b = rng.index(dominant);
    g.decay = rng.uniform(-kDecayMax, kDecayMax);
    g.decay_rate = rng.uniform(1.0, 3.0);
    g.decay_dim = rng.index(dominant);
    g.saturation = rng.uniform(j == 0 ? 0.0 : -kSaturationMax, kSaturationMax);
    g.half_point = rng.uniform(0.2, 0.6);
    g.saturation_dim = rng.index(dominant);
    model.latents_.push_back(std::move(g));
  }
  return model;
}

ParameterSpace SynthModel::viable_space() const { return space_.with_bounds(0, config_.threshold, 1.0); }

std::size_t SynthModel::cold_count() const {
  std::size_t c = 0;
  for (bool b : cold_) c += b ? 1 : 0;
  return c;
}

double SynthModel::latent(std::size_t j, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const auto& g = latents_.at(j);
  const double sat_x = x(static_cast<Eigen::Index>(g.saturation_dim));
  const double value = g.offset + g.linear.dot(x) +
                       g.product * x(static_cast<Eigen::Index>(g.product_a)) * x(static_cast<Eigen::Index>(g.product_b)) +
                       g.decay * std::exp(-g.decay_rate * x(static_cast<Eigen::Index>(g.decay_dim))) +
                       g.saturation * sat_x / (sat_x + g.half_point);
  return g.amplitude * value;
}

Eigen::VectorXd SynthModel::simulate(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (static_cast<std::size_t>(theta.size()) != config_.d) {
    throw DataError(fmt::format("simulator expects {} parameters, got {}", config_.d, theta.size()));
  }
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const auto& dim = space_[static_cast<std::size_t>(i)];
    if (!(theta(i) >= dim.lower && theta(i) <= dim.upper)) {
      throw DataError(fmt::format("parameter {} = {} outside [{}, {}]", dim.name, theta(i), dim.lower, dim.upper));
    }
  }
  const Eigen::VectorXd x = theta;  // raw == normalized on the unit cube
  Eigen::VectorXd g(static_cast<Eigen::Index>(config_.rank));
  for (std::size_t j = 0; j < config_.rank; ++j) g(static_cast<Eigen::Index>(j)) = latent(j, x);
  Eigen::VectorXd y = (base_ + loadings_ * g).cwiseMax(0.0);
  // Cold locations shut down below the threshold and recover linearly above it.
  const double ramp = std::clamp((x(0) - config_.threshold) / kColdRamp, 0.0, 1.0);
  if (ramp < 1.0) {
    for (std::size_t loc = 0; loc < config_.n_loc; ++loc) {
      if (cold_[loc]) y.segment(static_cast<Eigen::Index>(loc * config_.n_year), static_cast<Eigen::Index>(config_.n_year)) *= ramp;
    }
  }
  return y;
}

double SynthModel::output_cap() const {
  const double scale = std::sqrt(static_cast<double>(config_.n_loc * config_.n_year));
  double cap = kBaseLevel * kProfileMax;
  for (std::size_t j = 0; j < config_.rank; ++j) {
    cap += latent_bound(j, config_.d, kAmplitude * scale * std::pow(kAmplitudeDecay, static_cast<double>(j)));
  }
  return cap;
}

SynthDataset generate_dataset(const SynthModel& model, const ParameterSpace& design_space, std::size_t m,
                              std::uint64_t design_seed) {
  const auto& full = model.space();
  if (design_space.size() != full.size()) throw std::invalid_argument("design space dimension differs from the model");
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (design_space[i].lower < full[i].lower || design_space[i].upper > full[i].upper) {
      throw std::invalid_argument(fmt::format("design bounds for '{}' exceed the model space", design_space[i].name));
    }
  }
  auto design = sample_design(design_space, m, design_seed);
  const auto index = model.index_map();
  Eigen::MatrixXd y(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(index.size()));
  parallel_for(0, m, [&](std::size_t i) {
    const auto row = static_cast<Eigen::Index>(i);
    y.row(row) = model.simulate(design.values().row(row).transpose()).transpose();
  });
  return {std::move(design), OutputMatrix(std::move(y), index)};
}

void save_synth_config(const std::filesystem::path& path, const SynthConfig& c) {
  detail::write_json_file(path, {{"d", c.d},
                                 {"n_loc", c.n_loc},
                                 {"n_year", c.n_year},
                                 {"rank", c.rank},
                                 {"threshold", c.threshold},
                                 {"cold_fraction", c.cold_fraction},
                                 {"seed", c.seed}});
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  const auto j = detail::read_json_file(path);
  try {
    SynthConfig c;
    c.d = j.at("d").get<std::size_t>();
    c.n_loc = j.at("n_loc").get<std::size_t>();
    c.n_year = j.at("n_year").get<std::size_t>();
    c.rank = j.at("rank").get<std::size_t>();
    c.threshold = j.at("threshold").get<double>();
    c.cold_fraction = j.at("cold_fraction").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("'{}' is not a synthetic model config: {}", path.string(), e.what()));
  }
}

}  // namespace surrogate
