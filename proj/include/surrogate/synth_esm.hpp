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
#include <utility>
#include <vector>

#include "surrogate/dataset.hpp"

namespace surrogate {

/// Synthetic many-output simulator: d unit-cube parameters mapped to
/// n_loc x n_year nonnegative outputs with a low-rank structure, smooth
/// spatial loadings, periodic year-to-year modulation, and "cold" locations
/// whose outputs are exactly zero while parameter 0 is below threshold and
/// ramp back in above it.
struct SynthConfig {
  std::size_t d = 8;
  std::size_t n_loc = 1422;
  std::size_t n_year = 30;
  std::size_t rank = 5;
  double threshold = 0.3;
  double cold_fraction = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

class SynthModel {
 public:
  static SynthModel build(const SynthConfig& config);

  const SynthConfig& config() const { return config_; }
  /// Unit cube named p0..p{d-1}; raw parameters equal normalized ones.
  const ParameterSpace& space() const { return space_; }
  /// Subdomain where parameter 0 >= threshold (no forced zeros).
  ParameterSpace viable_space() const;
  OutputIndexMap index_map() const { return {config_.n_loc, config_.n_year}; }

  /// n x rank loading matrix, unit-norm columns.
  const Eigen::MatrixXd& loadings() const { return loadings_; }
  const std::vector<bool>& cold_mask() const { return cold_; }
  std::size_t cold_count() const;

  /// Latent coefficient g_j(theta) for a normalized parameter vector.
  double latent(std::size_t j, const Eigen::Ref<const Eigen::VectorXd>& unit_theta) const;

  /// One output row for a raw parameter vector; throws DataError when theta
  /// lies outside the space.
  Eigen::VectorXd simulate(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

  /// Upper bound on every output, valid for all seeds of this shape.
  double output_cap() const;

 private:
  struct Latent {
    double amplitude = 0.0;
    double offset = 0.0;
    Eigen::VectorXd linear;
    double product = 0.0;
    std::size_t product_a = 0, product_b = 0;
    double decay = 0.0;
    double decay_rate = 1.0;
    std::size_t decay_dim = 0;
    double saturation = 0.0;
    double half_point = 0.5;
    std::size_t saturation_dim = 0;
  };

  SynthModel(SynthConfig config, ParameterSpace space) : config_(config), space_(std::move(space)) {}

  SynthConfig config_;
  ParameterSpace space_;
  Eigen::MatrixXd loadings_;
  Eigen::VectorXd base_;
  std::vector<bool> cold_;
  std::vector<Latent> latents_;
};

struct SynthDataset {
  DesignMatrix design;
  OutputMatrix outputs;
};

/// Uniform design over `design_space` (a sub-box of the model's space) and
/// the simulated outputs; rows are simulated in parallel.
SynthDataset generate_dataset(const SynthModel& model, const ParameterSpace& design_space, std::size_t m,
                              std::uint64_t design_seed);

void save_synth_config(const std::filesystem::path& path, const SynthConfig& config);
SynthConfig load_synth_config(const std::filesystem::path& path);

}  // namespace surrogate
