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


#include <doctest.h>

#include "surrogate/error.hpp"
#include "surrogate/mlp.hpp"
#include "test_support.hpp"

using namespace surrogate;

namespace {

MlpArchitecture arch(std::size_t in, std::vector<std::size_t> hidden, std::size_t out) {
  return MlpArchitecture{in, std::move(hidden), out};
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

double max_abs_diff(const MlpWeights& a, const MlpWeights& b) {
  double d = 0.0;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    d = std::max(d, (a.layers[l].weight - b.layers[l].weight).cwiseAbs().maxCoeff());
    d = std::max(d, (a.layers[l].bias - b.layers[l].bias).cwiseAbs().maxCoeff());
  }
  return d;
}

// Noisy smooth targets that a network can fit and then overfit.
struct Problem {
  DesignMatrix design;
  Eigen::MatrixXd targets;
};

Problem noisy_problem(std::size_t rows, std::uint64_t seed) {
  const auto space = ParameterSpace::unit_cube({"a", "b", "c"});
  auto design = sample_design(space, rows, seed);
  Rng rng(seed + 1);
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows), 2);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const auto x = design.values().row(i);
    y(i, 0) = std::sin(3.0 * x(0)) + x(1) * x(2) + 0.3 * rng.normal();
    y(i, 1) = x(0) - x(2) + 0.3 * rng.normal();
  }
  return {std::move(design), std::move(y)};
}

}  // namespace

TEST_SUITE("mlp") {
  TEST_CASE("parameter counts") {
    CHECK(arch(8, {10, 10}, 5).parameter_count() == 255);
    CHECK(arch(8, {100, 100}, 42660).parameter_count() ==
          (8 * 100 + 100) + (100 * 100 + 100) + (100 * 42660 + 42660));
    CHECK(arch(2, {3, 4, 5}, 1).parameter_count() == 9 + 16 + 25 + 6);
    CHECK_NOTHROW(arch(8, {10}, 5).validate());
    CHECK_THROWS_AS(arch(8, {}, 5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(arch(8, {10, 10, 10, 10}, 5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(arch(8, {10, 0}, 5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(arch(0, {10, 10}, 5).validate(), std::invalid_argument);
  }

  TEST_CASE("He-uniform initialization") {
    const auto a = arch(8, {40, 20}, 3);
    const auto w = init_mlp(a, 5);
    REQUIRE(w.layers.size() == 3);
    const std::vector<double> fan_in{8, 40, 20};
    for (std::size_t l = 0; l < 3; ++l) {
      const double bound = std::sqrt(6.0 / fan_in[l]);
      CHECK(w.layers[l].weight.cwiseAbs().maxCoeff() <= bound);
      CHECK(w.layers[l].weight.cwiseAbs().maxCoeff() > 0.8 * bound);
      CHECK(w.layers[l].bias.isZero(0.0));
    }
    CHECK(init_mlp(a, 5) == w);
    CHECK_FALSE(init_mlp(a, 6) == w);
  }

  TEST_CASE("forward matches a hand-rolled loop") {
    const auto w = init_mlp(arch(3, {4, 5}, 2), 9);
    Rng rng(1);
    const auto x = testing::random_matrix(6, 3, rng);
    const auto y = forward(w, x);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      std::vector<double> h(x.row(r).data(), x.row(r).data() + 0);
      h.clear();
      for (Eigen::Index i = 0; i < 3; ++i) h.push_back(x(r, i));
      for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& layer = w.layers[l];
        std::vector<double> next(static_cast<std::size_t>(layer.weight.cols()));
        for (std::size_t j = 0; j < next.size(); ++j) {
          double s = layer.bias(static_cast<Eigen::Index>(j));
          for (std::size_t i = 0; i < h.size(); ++i) {
            s += h[i] * layer.weight(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
          }
          next[j] = (l + 1 < w.layers.size() && s < 0.0) ? 0.0 : s;
        }
        h = next;
      }
      for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(y(r, j) - h[static_cast<std::size_t>(j)]) < 1e-12);
    }
    CHECK_THROWS_AS(forward(w, Eigen::MatrixXd::Zero(2, 4)), DataError);
  }

  TEST_CASE("mse examples") {
    Eigen::MatrixXd p(1, 2), t(1, 2);
    p << 1.0, 3.0;
    t << 3.0, 1.0;
    CHECK(mse_loss(p, t) == 4.0);
    p << 0.0, 0.0;
    t << 1.0, -1.0;
    CHECK(mse_loss(p, t) == 1.0);
    CHECK_THROWS_AS(mse_loss(p, Eigen::MatrixXd::Zero(2, 2)), DataError);
  }

  TEST_CASE("gradient matches finite differences") {
    for (auto hidden : {std::vector<std::size_t>{6, 5}, std::vector<std::size_t>{4, 3, 5}}) {
      auto w = init_mlp(arch(3, hidden, 2), 17);
      for (auto& layer : w.layers) layer.bias.setConstant(0.05);
      Rng rng(2);
      const auto x = testing::random_matrix(7, 3, rng);
      const auto y = testing::random_matrix(7, 2, rng);
      const auto g = loss_gradient(w, x, y);
      CHECK(g.loss == mse_loss(forward(w, x), y));
      const double h = 1e-6;
      for (std::size_t l = 0; l < w.layers.size(); ++l) {
        auto probe = [&](double& param, double analytic) {
          const double saved = param;
          param = saved + h;
          const double up = mse_loss(forward(w, x), y);
          param = saved - h;
          const double down = mse_loss(forward(w, x), y);
          param = saved;
          const double numeric = (up - down) / (2.0 * h);
          CHECK(std::abs(numeric - analytic) <= 1e-6 * std::max(1.0, std::abs(analytic)));
        };
        for (Eigen::Index i = 0; i < w.layers[l].weight.size(); ++i) {
          probe(w.layers[l].weight.data()[i], g.gradient.layers[l].weight.data()[i]);
        }
        for (Eigen::Index i = 0; i < w.layers[l].bias.size(); ++i) {
          probe(w.layers[l].bias(i), g.gradient.layers[l].bias(i));
        }
      }
    }
  }

  TEST_CASE("dead unit receives no gradient") {
    auto w = init_mlp(arch(3, {5, 4}, 2), 3);
    w.layers[0].bias(2) = -1e6;
    Rng rng(3);
    const auto x = testing::random_matrix(10, 3, rng);
    const auto y = testing::random_matrix(10, 2, rng);
    const auto g = loss_gradient(w, x, y);
    CHECK(g.gradient.layers[0].weight.col(2).isZero(0.0));
    CHECK(g.gradient.layers[0].bias(2) == 0.0);
    CHECK(g.gradient.layers[1].weight.row(2).isZero(0.0));
  }

  TEST_CASE("duplicated batch leaves the gradient unchanged") {
    const auto w = init_mlp(arch(4, {8, 8}, 3), 4);
    Rng rng(4);
    const auto x = testing::random_matrix(9, 4, rng);
    const auto y = testing::random_matrix(9, 3, rng);
    Eigen::MatrixXd x2(18, 4), y2(18, 3);
    x2 << x, x;
    y2 << y, y;
    const auto g1 = loss_gradient(w, x, y);
    const auto g2 = loss_gradient(w, x2, y2);
    CHECK(g2.loss == doctest::Approx(g1.loss).epsilon(1e-14));
    CHECK(max_abs_diff(g1.gradient, g2.gradient) < 1e-14);
  }

  TEST_CASE("Adam first step and zero gradient") {
    const auto w0 = init_mlp(arch(3, {4, 4}, 2), 8);
    Rng rng(5);
    const auto g = loss_gradient(w0, testing::random_matrix(6, 3, rng), testing::random_matrix(6, 2, rng)).gradient;
    auto w = w0;
    auto state = AdamState::zeros_like(w);
    const double lr = 0.01;
    adam_step(w, g, state, lr);
    CHECK(state.step == 1);
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
      for (Eigen::Index i = 0; i < w.layers[l].weight.size(); ++i) {
        const double gi = g.layers[l].weight.data()[i];
        const double step = w.layers[l].weight.data()[i] - w0.layers[l].weight.data()[i];
        if (std::abs(gi) > 1e-4) CHECK(step == doctest::Approx(-lr * (gi > 0 ? 1.0 : -1.0)).epsilon(1e-3));
      }
    }

    auto still = w0;
    auto fresh = AdamState::zeros_like(still);
    for (int i = 0; i < 5; ++i) adam_step(still, still.zeros_like(), fresh, lr);
    CHECK(still == w0);
    CHECK(fresh.step == 5);
  }

  TEST_CASE("small steps descend") {
    auto w = init_mlp(arch(3, {10, 10}, 2), 10);
    Rng rng(6);
    const auto x = testing::random_matrix(20, 3, rng);
    const auto y = testing::random_matrix(20, 2, rng);
    auto state = AdamState::zeros_like(w);
    double prev = loss_gradient(w, x, y).loss;
    for (int i = 0; i < 20; ++i) {
      const auto g = loss_gradient(w, x, y);
      adam_step(w, g.gradient, state, 1e-4);
      const double now = loss_gradient(w, x, y).loss;
      CHECK(now < prev);
      prev = now;
    }
  }

  TEST_CASE("early stopping bookkeeping") {
    EarlyStopping stop(3);
    const std::vector<double> losses{5, 4, 4, 3, 3.5, 3, 3.2, 2.9, 3, 3, 3};
    std::vector<int> stopped;
    for (std::size_t i = 0; i < losses.size(); ++i) {
      const int epoch = static_cast<int>(i) + 1;
      stop.update(epoch, losses[i]);
      if (stop.should_stop(epoch)) {
        stopped.push_back(epoch);
        break;
      }
    }
    // The tie at epoch 6 is not an improvement.
    CHECK(stop.best_epoch() == 4);
    CHECK(stop.best_loss() == 3.0);
    REQUIRE(stopped.size() == 1);
    CHECK(stopped[0] == 7);
  }

  TEST_CASE("norm stats round trip") {
    Rng rng(7);
    Eigen::MatrixXd y = testing::random_matrix(30, 4, rng) * 50.0;
    y.col(2).setConstant(3.5);
    const auto stats = NormStats::fit(ParameterSpace::unit_cube({"a"}), y);
    CHECK(stats.target_std(2) == 1.0);
    const auto z = stats.standardize(y);
    CHECK(z.col(2).isZero(0.0));
    CHECK(std::abs(z.col(0).mean()) < 1e-12);
    CHECK(std::sqrt(z.col(0).squaredNorm() / 30.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((stats.destandardize(z) - y).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("constant targets are learned exactly") {
    const auto space = ParameterSpace::unit_cube({"a", "b"});
    const auto design = sample_design(space, 20, 1);
    Eigen::MatrixXd y = Eigen::MatrixXd::Constant(20, 2, 7.0);
    TrainConfig cfg;
    cfg.seed = 3;
    const auto result = train(arch(2, {10, 10}, 2), design, y, cfg);
    CHECK(result.report.best_val_loss < 1e-6);
    const auto pred = predict(result.model, design.values());
    CHECK((pred.array() - 7.0).abs().maxCoeff() < 1e-2);
  }

  TEST_CASE("training is deterministic and restores the best epoch") {
    const auto p = noisy_problem(20, 4);
    const auto a = arch(3, {20, 20}, 2);
    for (bool fixed : {false, true}) {
      TrainConfig cfg;
      cfg.seed = 11;
      cfg.learning_rate = 0.03;
      cfg.fixed_validation = fixed;
      const auto r1 = train(a, p.design, p.targets, cfg);
      const auto r2 = train(a, p.design, p.targets, cfg);
      CHECK(r1.model.weights == r2.model.weights);
      CHECK(r1.report.epochs.size() == r2.report.epochs.size());

      const auto& rep = r1.report;
      REQUIRE(rep.best_epoch >= 1);
      CHECK(rep.epochs[static_cast<std::size_t>(rep.best_epoch - 1)].val_loss == rep.best_val_loss);
      for (const auto& e : rep.epochs) CHECK(e.val_loss >= rep.best_val_loss);
      if (rep.stopped_epoch < cfg.max_epochs) CHECK(rep.stopped_epoch == rep.best_epoch + cfg.patience);

      const Eigen::MatrixXd x = normalize_inputs(p.design);
      const Eigen::MatrixXd z = r1.model.norm.standardize(p.targets);
      const double again = mse_loss(forward(r1.model.weights, rows_of(x, rep.best_val_indices)),
                                    rows_of(z, rep.best_val_indices));
      CHECK(again == rep.best_val_loss);

      TrainConfig capped = cfg;
      capped.max_epochs = rep.best_epoch;
      capped.patience = std::min(cfg.patience, capped.max_epochs);
      const auto r3 = train(a, p.design, p.targets, capped);
      CHECK(r3.model.weights == r1.model.weights);
    }
  }

  TEST_CASE("huge learning rates diverge") {
    const auto p = noisy_problem(20, 5);
    TrainConfig cfg;
    cfg.learning_rate = 1e200;
    CHECK_THROWS_AS(train(arch(3, {10, 10}, 2), p.design, p.targets, cfg), DivergenceError);
  }

  TEST_CASE("train rejects bad inputs") {
    const auto p = noisy_problem(20, 6);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(arch(3, {10, 10}, 3), p.design, p.targets, cfg), DataError);
    CHECK_THROWS_AS(train(arch(3, {10, 10}, 2), p.design, p.targets.topRows(10), cfg), DataError);
    cfg.patience = 0;
    CHECK_THROWS_AS(train(arch(3, {10, 10}, 2), p.design, p.targets, cfg), std::invalid_argument);
    cfg.patience = 10;
    cfg.val_fraction = 1.0;
    CHECK_THROWS_AS(train(arch(3, {10, 10}, 2), p.design, p.targets, cfg), std::invalid_argument);
  }

  TEST_CASE("predict counts out-of-range rows") {
    const auto p = noisy_problem(20, 7);
    TrainConfig cfg;
    cfg.max_epochs = 5;
    cfg.patience = 5;
    const auto r = train(arch(3, {10, 10}, 2), p.design, p.targets, cfg);
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 3, 0.5);
    x(1, 0) = 1.5;
    x(3, 2) = -0.1;
    std::size_t outside = 0;
    const auto y = predict(r.model, x, &outside);
    CHECK(outside == 2);
    CHECK(y.allFinite());
    CHECK_THROWS_AS(predict(r.model, Eigen::MatrixXd::Zero(1, 2)), DataError);
  }
}
