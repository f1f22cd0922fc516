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
#include <span>
#include <string>
#include <vector>

#include "surrogate/random.hpp"

namespace surrogate {

struct ParameterDim {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;

  bool operator==(const ParameterDim&) const = default;
};

/// Ordered, named box of sampled parameters. Rejects empty spaces, duplicate
/// names and zero- or negative-width dims at construction.
class ParameterSpace {
 public:
  explicit ParameterSpace(std::vector<ParameterDim> dims);

  static ParameterSpace unit_cube(const std::vector<std::string>& names);

  std::size_t size() const { return dims_.size(); }
  const ParameterDim& operator[](std::size_t i) const { return dims_[i]; }
  std::span<const ParameterDim> dims() const { return dims_; }
  std::vector<std::string> names() const;

  /// Copy with dim i narrowed to [lower, upper].
  ParameterSpace with_bounds(std::size_t i, double lower, double upper) const;

  bool operator==(const ParameterSpace&) const = default;

 private:
  std::vector<ParameterDim> dims_;
};

/// m x d matrix of raw parameter samples; every entry lies within its dim's bounds.
class DesignMatrix {
 public:
  DesignMatrix(ParameterSpace space, Eigen::MatrixXd values);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  const ParameterSpace& space() const { return space_; }

 private:
  ParameterSpace space_;
  Eigen::MatrixXd values_;
};

/// Column j <-> (location j / n_year, year j % n_year).
class OutputIndexMap {
 public:
  OutputIndexMap(std::size_t n_loc, std::size_t n_year);

  std::size_t n_loc() const { return n_loc_; }
  std::size_t n_year() const { return n_year_; }
  std::size_t size() const { return n_loc_ * n_year_; }

  std::size_t column(std::size_t location, std::size_t year) const { return location * n_year_ + year; }
  std::size_t location(std::size_t column) const { return column / n_year_; }
  std::size_t year(std::size_t column) const { return column % n_year_; }

  bool operator==(const OutputIndexMap&) const = default;

 private:
  std::size_t n_loc_;
  std::size_t n_year_;
};

/// m x n simulator outputs with their location x year column layout.
class OutputMatrix {
 public:
  OutputMatrix(Eigen::MatrixXd values, OutputIndexMap index_map);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  const OutputIndexMap& index_map() const { return index_map_; }

 private:
  Eigen::MatrixXd values_;
  OutputIndexMap index_map_;
};

struct EpochSplit {
  std::vector<std::size_t> fit_indices;
  std::vector<std::size_t> val_indices;
};

/// i.i.d. uniform samples within the space; deterministic given seed.
DesignMatrix sample_design(const ParameterSpace& space, std::size_t m, std::uint64_t seed);

/// Min-max scaling of raw inputs to the unit hypercube using the space bounds.
/// Values outside the bounds map outside [0, 1].
Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& raw, const ParameterSpace& space);
Eigen::MatrixXd normalize_inputs(const DesignMatrix& design);
Eigen::MatrixXd denormalize_inputs(const Eigen::MatrixXd& unit, const ParameterSpace& space);

/// floor(fraction * m_train), the validation size used by epoch_split.
std::size_t validation_count(std::size_t m_train, double fraction);

/// Fresh permutation of [0, m_train); the last validation_count entries are
/// the validation set. Throws std::invalid_argument when that count is zero.
EpochSplit epoch_split(std::size_t m_train, double fraction, Rng& rng);

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, std::span<const std::size_t> rows);

// File formats ---------------------------------------------------------------
//
// ".smx": "SMX1", u64 rows, u64 cols, [u64 n_loc, u64 n_year for outputs],
// rows*cols f64 row-major, all little-endian.
//
// Design CSV: header of parameter names, one sample per row.

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& values);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);

void save_outputs(const std::filesystem::path& path, const OutputMatrix& outputs);
OutputMatrix load_outputs(const std::filesystem::path& path);

struct RawDesign {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

void save_design(const std::filesystem::path& path, const DesignMatrix& design);
/// Parses a design CSV without bound checks (prediction inputs may extrapolate).
RawDesign read_design_csv(const std::filesystem::path& path);
/// Parses a design CSV and validates header names and bounds against space.
DesignMatrix load_design(const std::filesystem::path& path, const ParameterSpace& space);

void save_space(const std::filesystem::path& path, const ParameterSpace& space);
ParameterSpace load_space(const std::filesystem::path& path);

}  // namespace surrogate
