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


#include "surrogate/svd_compress.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "surrogate/error.hpp"

namespace surrogate {
namespace {

// Singular values below this fraction of the largest are treated as zero.
constexpr double kZeroRelative = 1e-12;

// Orthonormalizes the columns of `candidates` in place (two passes of modified
// Gram-Schmidt). Columns that collapse are replaced by the standard basis
// vector with the largest residual. Returns true if any column was replaced.
bool orthonormalize(Eigen::MatrixXd& q) {
  bool replaced = false;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double start = q.col(j).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    }
    double norm = q.col(j).norm();
    if (!(start > 0.0) || !(norm > 1e-8 * start)) {
      replaced = true;
      // Residual of e_r after projecting out the first j columns is
      // 1 - sum_i q(r, i)^2; pick the row with the largest one.
      Eigen::Index best = 0;
      q.leftCols(j).rowwise().squaredNorm().minCoeff(&best);
      q.col(j).setZero();
      q(best, j) = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
      }
      norm = q.col(j).norm();
    }
    q.col(j) /= norm;
  }
  return replaced;
}

void fix_signs(Eigen::MatrixXd& v, Eigen::MatrixXd& u) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index arg = 0;
    v.col(j).cwiseAbs().maxCoeff(&arg);
    if (v(arg, j) < 0.0) {
      v.col(j) = -v.col(j);
      u.col(j) = -u.col(j);
    }
  }
}

}  // namespace

TruncatedSvd truncated_svd(const Eigen::MatrixXd& a, Eigen::Index k) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index r = std::min(m, n);
  if (k < 1 || k > r) throw std::invalid_argument(fmt::format("rank k={} outside [1, {}]", k, r));

  // Eigendecomposition of the smaller Gram matrix.
  const bool wide = m <= n;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(r, r);
  if (wide) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw DataError("eigendecomposition of the Gram matrix failed");

  std::vector<double> sigma(static_cast<std::size_t>(r));
  Eigen::MatrixXd gram_vectors(r, k);
  for (Eigen::Index i = 0; i < r; ++i) {
    const Eigen::Index src = r - 1 - i;  // eigenvalues come ascending
    sigma[static_cast<std::size_t>(i)] = std::sqrt(std::max(eig.eigenvalues()(src), 0.0));
    if (i < k) gram_vectors.col(i) = eig.eigenvectors().col(src);
  }

  // Candidate right vectors: A^T u_i for the wide case (the 1/sigma_i scale
  // is irrelevant once the columns are orthonormalized), v_i directly otherwise.
  Eigen::MatrixXd q = wide ? Eigen::MatrixXd(a.transpose() * gram_vectors) : gram_vectors;
  const double sigma_max = sigma.front();
  bool degenerate = false;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(sigma[static_cast<std::size_t>(j)] > kZeroRelative * sigma_max)) {
      q.col(j).setZero();
      degenerate = true;
    }
  }
  degenerate = orthonormalize(q) || degenerate;

  // Rayleigh-Ritz: exact SVD of the projected m x k problem.
  const Eigen::MatrixXd b = a * q;
  Eigen::JacobiSVD<Eigen::MatrixXd> small(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  TruncatedSvd out;
  out.basis.right_vectors = q * small.matrixV();
  out.left_vectors = small.matrixU();
  fix_signs(out.basis.right_vectors, out.left_vectors);

  const auto& refined = small.singularValues();
  for (Eigen::Index i = 0; i < k; ++i) sigma[static_cast<std::size_t>(i)] = refined(i);
  const double top = sigma.front();
  for (std::size_t i = static_cast<std::size_t>(k); i < sigma.size(); ++i) {
    sigma[i] = std::min(sigma[i], sigma[static_cast<std::size_t>(k - 1)]);
  }
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > kZeroRelative * top)) {
      sigma[i] = 0.0;
      if (static_cast<Eigen::Index>(i) < k) degenerate = true;
    }
  }
  out.basis.singular_values = std::move(sigma);
  out.basis.degenerate = degenerate;
  return out;
}

double info_fraction(const SvdBasis& basis, Eigen::Index k, InfoMode mode) {
  const auto len = static_cast<Eigen::Index>(basis.singular_values.size());
  if (k < 1 || k > len) throw std::invalid_argument(fmt::format("k={} outside [1, {}]", k, len));
  double head = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < len; ++i) {
    const double s = basis.singular_values[static_cast<std::size_t>(i)];
    const double w = mode == InfoMode::kEnergy ? s * s : s;
    total += w;
    if (i < k) head += w;
  }
  if (total == 0.0) return 1.0;
  return head / total;
}

Eigen::Index select_k(const SvdBasis& basis, double target_fraction, InfoMode mode) {
  if (!(target_fraction > 0.0 && target_fraction <= 1.0)) {
    throw std::invalid_argument(fmt::format("target fraction {} outside (0, 1]", target_fraction));
  }
  const auto len = static_cast<Eigen::Index>(basis.singular_values.size());
  for (Eigen::Index k = 1; k <= len; ++k) {
    if (info_fraction(basis, k, mode) >= target_fraction) return k;
  }
  return len;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& a, const SvdBasis& basis) {
  if (a.cols() != basis.n()) {
    throw DataError(fmt::format("cannot project {} output columns onto a basis of length {}", a.cols(), basis.n()));
  }
  return a * basis.right_vectors;
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores, const SvdBasis& basis) {
  if (scores.cols() != basis.k()) {
    throw DataError(fmt::format("scores have {} columns but the basis keeps {}", scores.cols(), basis.k()));
  }
  return scores * basis.right_vectors.transpose();
}

}  // namespace surrogate
