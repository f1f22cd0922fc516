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


#include "surrogate/mlp.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "surrogate/error.hpp"

namespace surrogate {

// Architecture ------------------------------------------------------------------

void MlpArchitecture::validate() const {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("network input and output dims must be >= 1");
  if (hidden_widths.empty() || hidden_widths.size() > 3) {
    throw std::invalid_argument(fmt::format("network needs 1-3 hidden layers, got {}", hidden_widths.size()));
  }
  for (auto w : hidden_widths) {
    if (w < 1) throw std::invalid_argument("hidden layer widths must be >= 1");
  }
}

std::vector<std::size_t> MlpArchitecture::layer_sizes() const {
  std::vector<std::size_t> sizes{input_dim};
  sizes.insert(sizes.end(), hidden_widths.begin(), hidden_widths.end());
  sizes.push_back(output_dim);
  return sizes;
}

std::size_t MlpArchitecture::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) count += sizes[l] * sizes[l + 1] + sizes[l + 1];
  return count;
}

bool MlpWeights::operator==(const MlpWeights& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& a = layers[l];
    const auto& b = other.layers[l];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() || a.bias.size() != b.bias.size()) {
      return false;
    }
    if (a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

MlpWeights MlpWeights::zeros_like() const {
  MlpWeights z;
  z.layers.reserve(layers.size());
  for (const auto& l : layers) {
    z.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
  }
  return z;
}

// Normalization -------------------------------------------------------------------

NormStats NormStats::fit(const ParameterSpace& space, const Eigen::MatrixXd& targets) {
  NormStats stats{space, targets.colwise().mean().transpose(), Eigen::VectorXd(targets.cols())};
  const double rows = static_cast<double>(targets.rows());
  for (Eigen::Index j = 0; j < targets.cols(); ++j) {
    const double sd = std::sqrt((targets.col(j).array() - stats.target_mean(j)).square().sum() / rows);
    stats.target_std(j) = sd < 1e-12 ? 1.0 : sd;
  }
  return stats;
}

Eigen::MatrixXd NormStats::standardize(const Eigen::MatrixXd& targets) const {
  return (targets.rowwise() - target_mean.transpose()).array().rowwise() / target_std.transpose().array();
}

Eigen::MatrixXd NormStats::destandardize(const Eigen::MatrixXd& standardized) const {
  return (standardized.array().rowwise() * target_std.transpose().array()).rowwise() + target_mean.transpose().array();
}

// Network ---------------------------------------------------------------------------

MlpWeights init_mlp(const MlpArchitecture& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  const auto sizes = arch.layer_sizes();
  MlpWeights w;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(sizes[l]);
    const auto fan_out = static_cast<Eigen::Index>(sizes[l + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd::Zero(fan_out)};
    for (Eigen::Index j = 0; j < fan_out; ++j) {
      for (Eigen::Index i = 0; i < fan_in; ++i) layer.weight(i, j) = rng.uniform(-bound, bound);
    }
    w.layers.push_back(std::move(layer));
  }
  return w;
}

namespace {

Eigen::MatrixXd affine(const DenseLayer& layer, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = x * layer.weight;
  z.rowwise() += layer.bias.transpose();
  return z;
}

}  // namespace

Eigen::MatrixXd forward(const MlpWeights& weights, const Eigen::MatrixXd& inputs) {
  if (weights.layers.empty()) throw std::invalid_argument("network has no layers");
  if (inputs.cols() != weights.layers.front().weight.rows()) {
    throw DataError(fmt::format("network expects {} inputs, got {}", weights.layers.front().weight.rows(), inputs.cols()));
  }
  if (!inputs.allFinite()) throw DataError("network inputs contain non-finite values");
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    h = affine(weights.layers[l], h);
    if (l + 1 < weights.layers.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DataError(fmt::format("shape mismatch: {}x{} vs {}x{}", pred.rows(), pred.cols(), target.rows(), target.cols()));
  }
  if (pred.size() == 0) throw std::invalid_argument("mse of empty matrices");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

LossAndGradient loss_gradient(const MlpWeights& weights, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
  const std::size_t n_layers = weights.layers.size();
  // activations[l] feeds layer l; preacts[l] is layer l's affine output.
  std::vector<Eigen::MatrixXd> activations(n_layers);
  std::vector<Eigen::MatrixXd> preacts(n_layers);
  activations[0] = inputs;
  for (std::size_t l = 0; l < n_layers; ++l) {
    preacts[l] = affine(weights.layers[l], activations[l]);
    if (l + 1 < n_layers) activations[l + 1] = preacts[l].cwiseMax(0.0);
  }

  LossAndGradient out;
  out.loss = mse_loss(preacts.back(), targets);
  out.gradient.layers.resize(n_layers);

  Eigen::MatrixXd delta = (preacts.back() - targets) * (2.0 / static_cast<double>(targets.size()));
  for (std::size_t l = n_layers; l-- > 0;) {
    out.gradient.layers[l].weight = activations[l].transpose() * delta;
    out.gradient.layers[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * weights.layers[l].weight.transpose();
      delta = (preacts[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return out;
}

AdamState AdamState::zeros_like(const MlpWeights& weights) {
  return AdamState{weights.zeros_like(), weights.zeros_like(), 0};
}

void adam_step(MlpWeights& weights, const MlpWeights& grads, AdamState& state, double learning_rate,
               const AdamSettings& settings) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(settings.beta1, t);
  const double c2 = 1.0 - std::pow(settings.beta2, t);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = settings.beta1 * m + (1.0 - settings.beta1) * grad;
    v = settings.beta2 * v + (1.0 - settings.beta2) * grad.cwiseProduct(grad);
    param.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + settings.epsilon);
  };
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    update(weights.layers[l].weight, grads.layers[l].weight, state.first_moment.layers[l].weight,
           state.second_moment.layers[l].weight);
    update(weights.layers[l].bias, grads.layers[l].bias, state.first_moment.layers[l].bias,
           state.second_moment.layers[l].bias);
  }
}

// Training -------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs) throw std::invalid_argument("patience must be in [1, max_epochs]");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw std::invalid_argument("val_fraction must be in (0, 1)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be > 0");
}

bool EarlyStopping::update(int epoch, double loss) {
  if (loss < best_loss_) {
    best_loss_ = loss;
    best_epoch_ = epoch;
    return true;
  }
  return false;
}

TrainResult train(const MlpArchitecture& arch, const DesignMatrix& design, const Eigen::MatrixXd& targets,
                  const TrainConfig& config) {
  arch.validate();
  config.validate();
  if (arch.input_dim != static_cast<std::size_t>(design.cols()) ||
      arch.output_dim != static_cast<std::size_t>(targets.cols())) {
    throw DataError(fmt::format("architecture {}->{} does not match data {}->{}", arch.input_dim, arch.output_dim,
                                design.cols(), targets.cols()));
  }
  if (targets.rows() != design.rows()) {
    throw DataError(fmt::format("{} design rows but {} target rows", design.rows(), targets.rows()));
  }
  if (!targets.allFinite()) throw DataError("training targets contain non-finite values");

  const auto m = static_cast<std::size_t>(design.rows());
  const Eigen::MatrixXd inputs = normalize_inputs(design);
  NormStats norm = NormStats::fit(design.space(), targets);
  const Eigen::MatrixXd standardized = norm.standardize(targets);

  MlpWeights weights = init_mlp(arch, derive_seed(config.seed, 0));
  AdamState adam = AdamState::zeros_like(weights);
  Rng split_rng(derive_seed(config.seed, 1));
  std::optional<EpochSplit> frozen;
  if (config.fixed_validation) frozen = epoch_split(m, config.val_fraction, split_rng);

  EarlyStopping stopper(config.patience);
  MlpWeights best = weights;
  TrainReport report;
  report.epochs.reserve(static_cast<std::size_t>(config.max_epochs));
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const EpochSplit split = frozen ? *frozen : epoch_split(m, config.val_fraction, split_rng);
    const Eigen::MatrixXd fit_x = gather_rows(inputs, split.fit_indices);
    const Eigen::MatrixXd fit_y = gather_rows(standardized, split.fit_indices);

    const auto step = loss_gradient(weights, fit_x, fit_y);
    if (!std::isfinite(step.loss)) throw DivergenceError(epoch, config.learning_rate);
    adam_step(weights, step.gradient, adam, config.learning_rate, config.adam);

    const double val_loss =
        mse_loss(forward(weights, gather_rows(inputs, split.val_indices)), gather_rows(standardized, split.val_indices));
    if (!std::isfinite(val_loss)) throw DivergenceError(epoch, config.learning_rate);

    report.epochs.push_back({epoch, step.loss, val_loss});
    report.stopped_epoch = epoch;
    if (stopper.update(epoch, val_loss)) {
      best = weights;
      report.best_val_indices = split.val_indices;
    }
    if (stopper.should_stop(epoch)) break;
  }
  report.best_epoch = stopper.best_epoch();
  report.best_val_loss = stopper.best_loss();
  return TrainResult{MlpModel{arch, std::move(best), std::move(norm)}, std::move(report)};
}

Eigen::MatrixXd predict(const MlpModel& model, const Eigen::MatrixXd& raw_inputs, std::size_t* out_of_range_rows) {
  const auto& space = model.norm.input_space;
  if (static_cast<std::size_t>(raw_inputs.cols()) != space.size()) {
    throw DataError(fmt::format("surrogate expects {} parameters, got {}", space.size(), raw_inputs.cols()));
  }
  if (out_of_range_rows) {
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < raw_inputs.rows(); ++i) {
      for (Eigen::Index j = 0; j < raw_inputs.cols(); ++j) {
        const auto& dim = space[static_cast<std::size_t>(j)];
        if (raw_inputs(i, j) < dim.lower || raw_inputs(i, j) > dim.upper) {
          ++count;
          break;
        }
      }
    }
    *out_of_range_rows = count;
  }
  return model.norm.destandardize(forward(model.weights, normalize_inputs(raw_inputs, space)));
}

void save_loss_curve_csv(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << "epoch,fit_loss,val_loss\n";
  for (const auto& e : report.epochs) out << fmt::format("{},{:.17g},{:.17g}\n", e.epoch, e.fit_loss, e.val_loss);
  if (!out) throw DataError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace surrogate
