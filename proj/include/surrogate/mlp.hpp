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
#include <limits>
#include <vector>

#include "surrogate/dataset.hpp"
#include "surrogate/random.hpp"

namespace surrogate {

/// Fully connected network: ReLU on 1-3 hidden layers, identity output.
struct MlpArchitecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths;
  std::size_t output_dim = 0;

  /// Throws std::invalid_argument on an invalid shape.
  void validate() const;
  std::vector<std::size_t> layer_sizes() const;
  std::size_t parameter_count() const;

  bool operator==(const MlpArchitecture&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  ///< fan_in x fan_out
  Eigen::VectorXd bias;    ///< fan_out
};

struct MlpWeights {
  std::vector<DenseLayer> layers;

  bool operator==(const MlpWeights& other) const;
  /// Same shapes, all zeros.
  MlpWeights zeros_like() const;
};

/// Min-max bounds for inputs and z-score statistics for targets.
struct NormStats {
  ParameterSpace input_space;
  Eigen::VectorXd target_mean;
  Eigen::VectorXd target_std;

  /// Per-column mean and population std; std < 1e-12 is replaced by 1.
  static NormStats fit(const ParameterSpace& space, const Eigen::MatrixXd& targets);

  Eigen::MatrixXd standardize(const Eigen::MatrixXd& targets) const;
  Eigen::MatrixXd destandardize(const Eigen::MatrixXd& standardized) const;
};

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int max_epochs = 800;
  int patience = 100;
  double val_fraction = 0.3;
  double learning_rate = 0.01;
  AdamSettings adam;
  std::uint64_t seed = 0;
  /// Draw one split before the first epoch and reuse it, instead of
  /// reshuffling every epoch.
  bool fixed_validation = false;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double fit_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  int stopped_epoch = 0;
  double best_val_loss = 0.0;
  /// Validation rows used at best_epoch.
  std::vector<std::size_t> best_val_indices;
};

/// Tracks the best validation loss; strict improvement only, no min-delta.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Returns true if `loss` is a new best.
  bool update(int epoch, double loss);
  bool should_stop(int epoch) const { return epoch - best_epoch_ >= patience_; }

  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

struct AdamState {
  MlpWeights first_moment;
  MlpWeights second_moment;
  int step = 0;

  static AdamState zeros_like(const MlpWeights& weights);
};

/// Everything needed to evaluate a trained emulator.
struct MlpModel {
  MlpArchitecture arch;
  MlpWeights weights;
  NormStats norm;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// He-uniform weights (bound sqrt(6 / fan_in)) and zero biases.
MlpWeights init_mlp(const MlpArchitecture& arch, std::uint64_t seed);

/// Network outputs for rows of normalized inputs.
Eigen::MatrixXd forward(const MlpWeights& weights, const Eigen::MatrixXd& inputs);

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

struct LossAndGradient {
  double loss = 0.0;
  MlpWeights gradient;
};

/// Exact gradient of mse_loss(forward(inputs), targets) by backpropagation.
/// The ReLU derivative at exactly zero is taken as zero.
LossAndGradient loss_gradient(const MlpWeights& weights, const Eigen::MatrixXd& inputs,
                              const Eigen::MatrixXd& targets);

/// One bias-corrected Adam update; increments state.step before use.
void adam_step(MlpWeights& weights, const MlpWeights& grads, AdamState& state, double learning_rate,
               const AdamSettings& settings = {});

/// Full-batch Adam with per-epoch shuffle/split and early stopping; returns
/// the best-epoch weights. Inputs are raw parameters, targets are raw units.
/// Throws DivergenceError on a non-finite loss.
TrainResult train(const MlpArchitecture& arch, const DesignMatrix& design, const Eigen::MatrixXd& targets,
                 const TrainConfig& config);

/// Normalizes raw inputs, runs the network and maps back to target units.
/// `out_of_range_rows`, when given, receives the count of rows with any
/// coordinate outside the training space.
Eigen::MatrixXd predict(const MlpModel& model, const Eigen::MatrixXd& raw_inputs,
                        std::size_t* out_of_range_rows = nullptr);

/// Loss curve CSV: epoch,fit_loss,val_loss.
void save_loss_curve_csv(const std::filesystem::path& path, const TrainReport& report);

}  // namespace surrogate
