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


#include "surrogate/metrics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "surrogate/error.hpp"
#include "surrogate/parallel.hpp"

namespace surrogate {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_lengths(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw DataError(fmt::format("length mismatch: {} vs {}", a, b));
}

struct ColumnSums {
  double sse = 0.0;
  double sst = 0.0;
};

ColumnSums column_sums(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  const double mean = y.mean();
  return {(y - yhat).squaredNorm(), (y.array() - mean).square().sum()};
}

double mean_or_nan(double sum, std::size_t count) { return count == 0 ? kNaN : sum / static_cast<double>(count); }

}  // namespace

std::optional<double> r2_score(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  check_lengths(y.size(), yhat.size());
  if (y.size() < 2) throw std::invalid_argument("r2_score needs at least two samples");
  const auto s = column_sums(y, yhat);
  if (s.sst == 0.0) return std::nullopt;
  return 1.0 - s.sse / s.sst;
}

double mse(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yhat) {
  check_lengths(y.size(), yhat.size());
  if (y.size() < 1) throw std::invalid_argument("mse needs at least one sample");
  return (y - yhat).squaredNorm() / static_cast<double>(y.size());
}

void aggregate_r2(EvalReport& report, const OutputIndexMap& index_map) {
  const std::size_t n = index_map.size();
  if (report.per_output_r2.size() != n) throw DataError("per-output scores do not match the index map");
  std::vector<double> loc_sum(index_map.n_loc(), 0.0), year_sum(index_map.n_year(), 0.0);
  std::vector<std::size_t> loc_count(index_map.n_loc(), 0), year_count(index_map.n_year(), 0);
  double total = 0.0;
  std::size_t defined = 0;
  report.skipped_outputs.clear();
  for (std::size_t j = 0; j < n; ++j) {
    const double r2 = report.per_output_r2[j];
    if (std::isnan(r2)) {
      report.skipped_outputs.push_back(j);
      continue;
    }
    loc_sum[index_map.location(j)] += r2;
    ++loc_count[index_map.location(j)];
    year_sum[index_map.year(j)] += r2;
    ++year_count[index_map.year(j)];
    total += r2;
    ++defined;
  }
  report.per_location_r2.resize(index_map.n_loc());
  for (std::size_t l = 0; l < index_map.n_loc(); ++l) report.per_location_r2[l] = mean_or_nan(loc_sum[l], loc_count[l]);
  report.per_year_r2.resize(index_map.n_year());
  for (std::size_t t = 0; t < index_map.n_year(); ++t) report.per_year_r2[t] = mean_or_nan(year_sum[t], year_count[t]);
  report.location_defined_count = std::move(loc_count);
  report.overall_r2 = mean_or_nan(total, defined);
}

EvalReport evaluate(const OutputMatrix& truth, const Eigen::MatrixXd& pred) {
  const auto& y = truth.values();
  if (pred.rows() != y.rows() || pred.cols() != y.cols()) {
    throw DataError(fmt::format("prediction shape {}x{} does not match truth {}x{}", pred.rows(), pred.cols(), y.rows(),
                                y.cols()));
  }
  if (y.rows() < 2) throw DataError(fmt::format("evaluation needs at least 2 samples, got {}", y.rows()));

  const auto n = static_cast<std::size_t>(y.cols());
  std::vector<ColumnSums> sums(n);
  parallel_for(0, n, [&](std::size_t j) {
    const auto c = static_cast<Eigen::Index>(j);
    sums[j] = column_sums(y.col(c), pred.col(c));
  });

  EvalReport report;
  report.per_output_r2.resize(n);
  double sse_total = 0.0;
  double sse_defined = 0.0;
  double sst_defined = 0.0;
  double standardized_total = 0.0;
  std::size_t defined = 0;
  const double q = static_cast<double>(y.rows());
  for (std::size_t j = 0; j < n; ++j) {
    sse_total += sums[j].sse;
    if (sums[j].sst == 0.0) {
      report.per_output_r2[j] = kNaN;
      continue;
    }
    report.per_output_r2[j] = 1.0 - sums[j].sse / sums[j].sst;
    sse_defined += sums[j].sse;
    sst_defined += sums[j].sst;
    // sse / variance, where variance = sst / q
    standardized_total += sums[j].sse * q / sums[j].sst;
    ++defined;
  }
  report.overall_mse = sse_total / static_cast<double>(y.size());
  report.overall_mse_standardized = defined == 0 ? kNaN : standardized_total / (q * static_cast<double>(defined));
  report.overall_r2_pooled = sst_defined == 0.0 ? kNaN : 1.0 - sse_defined / sst_defined;
  aggregate_r2(report, truth.index_map());
  return report;
}

std::string format_summary(const EvalReport& report) {
  std::size_t worst = 0, best = 0;
  bool any = false;
  for (std::size_t l = 0; l < report.per_location_r2.size(); ++l) {
    const double v = report.per_location_r2[l];
    if (std::isnan(v)) continue;
    if (!any || v < report.per_location_r2[worst]) worst = l;
    if (!any || v > report.per_location_r2[best]) best = l;
    any = true;
  }
  std::string s;
  s += fmt::format("overall_r2 {:.6f}\n", report.overall_r2);
  s += fmt::format("overall_r2_pooled {:.6f}\n", report.overall_r2_pooled);
  s += fmt::format("overall_mse {:.6g}\n", report.overall_mse);
  s += fmt::format("overall_mse_standardized {:.6g}\n", report.overall_mse_standardized);
  if (any) {
    s += fmt::format("worst_location {} r2 {:.6f}\n", worst, report.per_location_r2[worst]);
    s += fmt::format("best_location {} r2 {:.6f}\n", best, report.per_location_r2[best]);
  }
  s += fmt::format("skipped_outputs {}\n", report.skipped_outputs.size());
  return s;
}

void save_report(const std::filesystem::path& dir, const EvalReport& report, const OutputIndexMap& index_map) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write '{}'", (dir / name).string()));
    return out;
  };
  {
    auto out = open("per_output.csv");
    out << "column,location,year,r2\n";
    for (std::size_t j = 0; j < report.per_output_r2.size(); ++j) {
      out << fmt::format("{},{},{},{}\n", j, index_map.location(j), index_map.year(j), report.per_output_r2[j]);
    }
  }
  {
    auto out = open("per_location.csv");
    out << "location,r2,defined_outputs\n";
    for (std::size_t l = 0; l < report.per_location_r2.size(); ++l) {
      out << fmt::format("{},{},{}\n", l, report.per_location_r2[l], report.location_defined_count[l]);
    }
  }
  {
    auto out = open("per_year.csv");
    out << "year,r2\n";
    for (std::size_t t = 0; t < report.per_year_r2.size(); ++t) out << fmt::format("{},{}\n", t, report.per_year_r2[t]);
  }
  {
    auto out = open("summary.txt");
    out << format_summary(report);
  }
}

}  // namespace surrogate
