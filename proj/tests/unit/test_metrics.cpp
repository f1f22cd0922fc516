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

#include <fstream>

#include "surrogate/error.hpp"
#include "surrogate/metrics.hpp"
#include "test_support.hpp"

using namespace surrogate;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Straightforward long double reference for one column.
long double reference_r2(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  long double mean = 0.0L;
  for (Eigen::Index i = 0; i < y.size(); ++i) mean += y(i);
  mean /= static_cast<long double>(y.size());
  long double sse = 0.0L, sst = 0.0L;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    sse += (static_cast<long double>(y(i)) - yhat(i)) * (static_cast<long double>(y(i)) - yhat(i));
    sst += (y(i) - mean) * (y(i) - mean);
  }
  return 1.0L - sse / sst;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("r2 examples") {
    const auto y = vec({1, 2, 3});
    CHECK(*r2_score(y, y) == 1.0);
    CHECK(*r2_score(y, vec({2, 2, 2})) == 0.0);
    CHECK(*r2_score(vec({0, 2}), vec({1, 2})) == 0.5);
    CHECK(*r2_score(vec({0, 2}), vec({2, 4})) == -3.0);
    CHECK_FALSE(r2_score(vec({4, 4, 4}), vec({1, 2, 3})).has_value());
    CHECK_THROWS_AS(r2_score(vec({1}), vec({1})), std::invalid_argument);
    CHECK_THROWS_AS(r2_score(y, vec({1, 2})), DataError);
  }

  TEST_CASE("mse examples") {
    CHECK(mse(vec({1, 3}), vec({3, 1})) == 4.0);
    CHECK(mse(vec({0, 0, 0, 0}), vec({1, -1, 1, -1})) == 1.0);
    CHECK_THROWS_AS(mse(vec({1}), vec({1, 2})), DataError);
  }

  TEST_CASE("aggregation example") {
    const OutputIndexMap map(2, 2);
    EvalReport r;
    r.per_output_r2.resize(4);
    r.per_output_r2[map.column(0, 0)] = 1.0;
    r.per_output_r2[map.column(0, 1)] = 0.8;
    r.per_output_r2[map.column(1, 0)] = 0.6;
    r.per_output_r2[map.column(1, 1)] = 0.6;
    aggregate_r2(r, map);
    CHECK(r.per_location_r2[0] == doctest::Approx(0.9));
    CHECK(r.per_location_r2[1] == doctest::Approx(0.6));
    CHECK(r.per_year_r2[0] == doctest::Approx(0.8));
    CHECK(r.per_year_r2[1] == doctest::Approx(0.7));
    CHECK(r.overall_r2 == doctest::Approx(0.75));
  }

  TEST_CASE("zero-variance columns are skipped") {
    const OutputIndexMap map(3, 2);
    Rng rng(1);
    Eigen::MatrixXd y = testing::random_matrix(10, 6, rng);
    y.col(map.column(1, 0)).setZero();
    y.col(map.column(1, 1)).setConstant(2.0);
    y.col(map.column(2, 1)).setConstant(-1.0);
    const Eigen::MatrixXd pred = y + 0.1 * testing::random_matrix(10, 6, rng);
    const auto r = evaluate(OutputMatrix(y, map), pred);
    CHECK(r.skipped_outputs == std::vector<std::size_t>{2, 3, 5});
    CHECK(std::isnan(r.per_location_r2[1]));
    CHECK(r.location_defined_count == std::vector<std::size_t>{2, 0, 1});
    CHECK(r.per_location_r2[2] == doctest::Approx(r.per_output_r2[4]));
    CHECK(r.per_year_r2[1] == doctest::Approx(r.per_output_r2[1]));
    CHECK(r.overall_r2 == doctest::Approx((r.per_output_r2[0] + r.per_output_r2[1] + r.per_output_r2[4]) / 3.0));
    CHECK(std::isfinite(r.overall_r2_pooled));
  }

  TEST_CASE("evaluate matches a long double reference") {
    Rng rng(2);
    const OutputIndexMap map(5, 4);
    const Eigen::MatrixXd y = 1e3 + testing::random_matrix(200, 20, rng).array();
    const Eigen::MatrixXd pred = y + 0.3 * testing::random_matrix(200, 20, rng);
    const auto r = evaluate(OutputMatrix(y, map), pred);
    for (Eigen::Index j = 0; j < 20; ++j) {
      const auto ref = reference_r2(y.col(j), pred.col(j));
      CHECK(std::abs(r.per_output_r2[static_cast<std::size_t>(j)] - static_cast<double>(ref)) < 1e-10);
    }
    CHECK(r.overall_mse == doctest::Approx((y - pred).squaredNorm() / 4000.0).epsilon(1e-12));
  }

  TEST_CASE("weighted location means recover the overall mean") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
      const std::size_t n_loc = 1 + rng.index(6), n_year = 1 + rng.index(5);
      const OutputIndexMap map(n_loc, n_year);
      EvalReport r;
      r.per_output_r2.resize(map.size());
      for (auto& v : r.per_output_r2) v = rng.uniform() < 0.2 ? std::nan("") : rng.uniform(-1.0, 1.0);
      aggregate_r2(r, map);
      double weighted = 0.0;
      std::size_t total = 0;
      for (std::size_t l = 0; l < n_loc; ++l) {
        if (r.location_defined_count[l] == 0) continue;
        weighted += r.per_location_r2[l] * static_cast<double>(r.location_defined_count[l]);
        total += r.location_defined_count[l];
      }
      if (total == 0) {
        CHECK(std::isnan(r.overall_r2));
      } else {
        CHECK(std::abs(weighted / static_cast<double>(total) - r.overall_r2) < 1e-12);
      }
    }
  }

  TEST_CASE("r2 is invariant to shift and scale") {
    Rng rng(4);
    const OutputIndexMap map(3, 3);
    const Eigen::MatrixXd y = testing::random_matrix(30, 9, rng);
    const Eigen::MatrixXd pred = y + 0.5 * testing::random_matrix(30, 9, rng);
    const auto a = evaluate(OutputMatrix(y, map), pred);
    const auto b = evaluate(OutputMatrix((y.array() * 250.0 + 7.0).matrix(), map), (pred.array() * 250.0 + 7.0).matrix());
    for (std::size_t j = 0; j < 9; ++j) CHECK(std::abs(a.per_output_r2[j] - b.per_output_r2[j]) < 1e-10);
    CHECK(std::abs(a.overall_r2_pooled - b.overall_r2_pooled) < 1e-10);
    CHECK(a.overall_mse_standardized == doctest::Approx(b.overall_mse_standardized).epsilon(1e-10));
    CHECK(b.overall_mse == doctest::Approx(a.overall_mse * 250.0 * 250.0).epsilon(1e-10));
  }

  TEST_CASE("standardized mse equals one minus r2 per column") {
    Rng rng(5);
    const OutputIndexMap map(1, 4);
    const Eigen::MatrixXd y = testing::random_matrix(50, 4, rng);
    const Eigen::MatrixXd pred = y + testing::random_matrix(50, 4, rng);
    const auto r = evaluate(OutputMatrix(y, map), pred);
    CHECK(r.overall_mse_standardized == doctest::Approx(1.0 - r.overall_r2).epsilon(1e-12));
  }

  TEST_CASE("evaluate errors") {
    const OutputIndexMap map(1, 2);
    CHECK_THROWS_AS(evaluate(OutputMatrix(Eigen::MatrixXd::Ones(3, 2), map), Eigen::MatrixXd::Ones(3, 3)), DataError);
    CHECK_THROWS_AS(evaluate(OutputMatrix(Eigen::MatrixXd::Ones(1, 2), map), Eigen::MatrixXd::Ones(1, 2)), DataError);
    EvalReport r;
    r.per_output_r2 = {0.5};
    CHECK_THROWS_AS(aggregate_r2(r, map), DataError);
  }

  TEST_CASE("report files") {
    testing::TempDir dir("report");
    const OutputIndexMap map(2, 3);
    Rng rng(6);
    const Eigen::MatrixXd y = testing::random_matrix(8, 6, rng);
    const auto r = evaluate(OutputMatrix(y, map), y);
    save_report(dir.path(), r, map);
    for (const char* f : {"per_output.csv", "per_location.csv", "per_year.csv", "summary.txt"}) {
      CHECK(std::filesystem::exists(dir / f));
    }
    std::ifstream in(dir / "per_location.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "location,r2,defined_outputs");
    CHECK(format_summary(r).find("overall_r2 1.000000") != std::string::npos);
  }
}
