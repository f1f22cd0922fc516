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

#include <vector>

namespace surrogate {

/// How info_fraction weighs singular values.
enum class InfoMode {
  kPlainSum,  ///< sum of sigma_i (default)
  kEnergy,    ///< sum of sigma_i^2
};

/// Truncated right singular basis of a training output matrix.
///
/// `singular_values` holds the full descending spectrum (length min(m, n));
/// `right_vectors` is n x k with orthonormal columns. Each column is signed so
/// its largest-magnitude entry is positive.
struct SvdBasis {
  std::vector<double> singular_values;
  Eigen::MatrixXd right_vectors;
  /// Set when a retained direction has a numerically zero singular value and
  /// was filled in by completing an orthonormal set.
  bool degenerate = false;

  Eigen::Index k() const { return right_vectors.cols(); }
  Eigen::Index n() const { return right_vectors.rows(); }
};

struct TruncatedSvd {
  SvdBasis basis;
  Eigen::MatrixXd left_vectors;  ///< m x k
};

/// Rank-k truncated SVD via the m x m Gram matrix A A^T, followed by a
/// Rayleigh-Ritz refinement on the retained subspace so the returned right
/// vectors are orthonormal to working precision even when the spectrum decays
/// by many orders of magnitude.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& a, Eigen::Index k);

double info_fraction(const SvdBasis& basis, Eigen::Index k, InfoMode mode = InfoMode::kPlainSum);

/// Smallest k whose info fraction reaches target_fraction.
Eigen::Index select_k(const SvdBasis& basis, double target_fraction, InfoMode mode = InfoMode::kPlainSum);

/// Scores A V_K (equivalently (V_K^T A^T)^T).
Eigen::MatrixXd project(const Eigen::MatrixXd& a, const SvdBasis& basis);

/// Full-dimension outputs scores V_K^T.
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores, const SvdBasis& basis);

}  // namespace surrogate
