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

#include <set>

#include "surrogate/error.hpp"
#include "surrogate/svd_compress.hpp"
#include "surrogate/synth_esm.hpp"
#include "test_support.hpp"

using namespace surrogate;

namespace {

SynthConfig small_config(std::uint64_t seed) {
  SynthConfig c;
  c.n_loc = 120;
  c.n_year = 10;
  c.seed = seed;
  return c;
}

std::vector<Eigen::Index> columns_where(const SynthModel& model, bool cold) {
  std::vector<Eigen::Index> cols;
  const auto map = model.index_map();
  for (std::size_t j = 0; j < map.size(); ++j) {
    if (model.cold_mask()[map.location(j)] == cold) cols.push_back(static_cast<Eigen::Index>(j));
  }
  return cols;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("model construction is deterministic") {
    const auto a = SynthModel::build(small_config(3));
    const auto b = SynthModel::build(small_config(3));
    const auto c = SynthModel::build(small_config(4));
    CHECK(a.loadings() == b.loadings());
    CHECK(a.cold_mask() == b.cold_mask());
    CHECK_FALSE(a.loadings() == c.loadings());
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(8, 0.6);
    CHECK(a.simulate(theta) == b.simulate(theta));
  }

  TEST_CASE("default shape") {
    const auto model = SynthModel::build(SynthConfig{});
    CHECK(model.index_map().size() == 42660);
    CHECK(model.cold_count() == 213);
    CHECK(model.loadings().rows() == 42660);
    CHECK(model.loadings().cols() == 5);
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(model.loadings().col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    const auto viable = model.viable_space();
    CHECK(viable[0].lower == 0.3);
    CHECK(viable[0].upper == 1.0);
    CHECK(viable[1] == model.space()[1]);
  }

  TEST_CASE("cold locations are zero below the threshold") {
    const auto model = SynthModel::build(small_config(5));
    const auto cold = columns_where(model, true);
    const auto warm = columns_where(model, false);
    REQUIRE(cold.size() == 18 * 10);
    const auto low = generate_dataset(model, model.space().with_bounds(0, 0.0, 0.3), 50, 1);
    for (Eigen::Index i = 0; i < 50; ++i) {
      for (auto j : cold) REQUIRE(low.outputs.values()(i, j) == 0.0);
      double warm_sum = 0.0;
      for (auto j : warm) warm_sum += low.outputs.values()(i, j);
      CHECK(warm_sum > 0.0);
    }
    const auto high = generate_dataset(model, model.space().with_bounds(0, 0.8, 1.0), 50, 2);
    for (Eigen::Index i = 0; i < 50; ++i) {
      double cold_sum = 0.0;
      for (auto j : cold) cold_sum += high.outputs.values()(i, j);
      CHECK(cold_sum > 0.0);
    }
  }

  TEST_CASE("outputs are nonnegative and bounded") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto model = SynthModel::build(small_config(seed));
      const auto data = generate_dataset(model, model.space(), 200, seed + 10);
      CHECK(data.outputs.values().minCoeff() >= 0.0);
      CHECK(data.outputs.values().maxCoeff() <= model.output_cap());
      Eigen::VectorXd corner = Eigen::VectorXd::Ones(8);
      CHECK(model.simulate(corner).maxCoeff() <= model.output_cap());
    }
  }

  TEST_CASE("viable rows are never all zero") {
    const auto model = SynthModel::build(small_config(6));
    const auto data = generate_dataset(model, model.viable_space(), 300, 3);
    for (Eigen::Index i = 0; i < data.outputs.rows(); ++i) CHECK(data.outputs.values().row(i).maxCoeff() > 0.0);
    CHECK(data.design.values().col(0).minCoeff() >= 0.3);
  }

  TEST_CASE("outputs are continuous in the parameters") {
    const auto model = SynthModel::build(small_config(7));
    Rng rng(1);
    const double h = 1e-7;
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd x(8);
      for (Eigen::Index i = 0; i < 8; ++i) x(i) = rng.uniform(h, 1.0 - h);
      if (t < 20) x(0) = 0.3 + rng.uniform(-1e-6, 1e-6);
      const auto y = model.simulate(x);
      for (Eigen::Index i = 0; i < 8; ++i) {
        Eigen::VectorXd xp = x;
        xp(i) += h;
        worst = std::max(worst, (model.simulate(xp) - y).cwiseAbs().maxCoeff() / h);
      }
    }
    CHECK(worst < 10.0 * model.output_cap());

    Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 0.5);
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {1e-2, 1e-3, 1e-4}) {
      double change = 0.0;
      for (Eigen::Index i = 0; i < 8; ++i) {
        Eigen::VectorXd xp = x;
        xp(i) += delta;
        change = std::max(change, (model.simulate(xp) - model.simulate(x)).cwiseAbs().maxCoeff());
      }
      CHECK(change < prev);
      CHECK(change <= 10.0 * model.output_cap() * delta);
      prev = change;
    }
  }

  TEST_CASE("five components carry most of the signal") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto model = SynthModel::build(small_config(seed));
      const auto data = generate_dataset(model, model.space(), 20, seed);
      const auto svd = truncated_svd(data.outputs.values(), 5);
      CHECK(info_fraction(svd.basis, 5) >= 0.9);
    }
  }

  TEST_CASE("latents depend on their own parameter") {
    const auto model = SynthModel::build(small_config(8));
    Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 0.5);
    for (std::size_t j = 1; j < 5; ++j) {
      Eigen::VectorXd lo = x, hi = x;
      lo(static_cast<Eigen::Index>(j)) = 0.0;
      hi(static_cast<Eigen::Index>(j)) = 1.0;
      CHECK(std::abs(model.latent(j, hi) - model.latent(j, lo)) > 0.5 * std::abs(model.latent(j, x) - model.latent(j, lo)));
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    const auto model = SynthModel::build(small_config(9));
    Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 0.5);
    x(3) = 1.01;
    CHECK_THROWS_AS(model.simulate(x), DataError);
    x(3) = std::nan("");
    CHECK_THROWS_AS(model.simulate(x), DataError);
    CHECK_THROWS_AS(model.simulate(Eigen::VectorXd::Constant(7, 0.5)), DataError);
    const auto too_wide = ParameterSpace({{"p0", 0.0, 2.0}, {"p1", 0, 1}, {"p2", 0, 1}, {"p3", 0, 1}, {"p4", 0, 1},
                                          {"p5", 0, 1}, {"p6", 0, 1}, {"p7", 0, 1}});
    CHECK_THROWS_AS(generate_dataset(model, too_wide, 5, 1), std::invalid_argument);
    SynthConfig bad = small_config(1);
    bad.threshold = 1.0;
    CHECK_THROWS_AS(SynthModel::build(bad), std::invalid_argument);
  }

  TEST_CASE("datasets have distinct rows and reproduce") {
    const auto model = SynthModel::build(small_config(10));
    const auto a = generate_dataset(model, model.space(), 100, 42);
    const auto b = generate_dataset(model, model.space(), 100, 42);
    CHECK(a.outputs.values() == b.outputs.values());
    std::set<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < 100; ++i) {
      rows.insert(std::vector<double>(a.design.values().row(i).begin(), a.design.values().row(i).end()));
    }
    CHECK(rows.size() == 100);
  }

  TEST_CASE("config round trip") {
    testing::TempDir dir("synthcfg");
    auto c = small_config(77);
    c.threshold = 0.25;
    save_synth_config(dir / "c.json", c);
    const auto back = load_synth_config(dir / "c.json");
    CHECK(back.seed == 77);
    CHECK(back.threshold == 0.25);
    CHECK(back.n_loc == 120);
  }
}
