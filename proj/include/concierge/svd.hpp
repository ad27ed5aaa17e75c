#pragma once

// Truncated SVD: exact dense factorization for small problems, randomized range
// finding with power iterations otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SVD>

#include "concierge/errors.hpp"
#include "concierge/random.hpp"
#include "concierge/textprep.hpp"

namespace concierge {

/// X ~ U diag(S) V^T with documents as rows of X.
struct LsaModel {
  Eigen::MatrixXd U;  // n x r
  Eigen::VectorXd S;  // r, descending
  Eigen::MatrixXd V;  // terms x r
  int r = 0;
};

struct SvdOptions {
  int oversampling = 10;
  int power_iterations = 4;
  /// Problems with max(n, V) at or below this use the exact dense solver.
  Eigen::Index dense_threshold = 200;
  std::uint64_t seed = 0;
};

namespace detail {

inline Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(Y.rows(), Y.cols());
}

/// Flip each pair so the largest-magnitude entry of every V column is positive.
inline void normalize_signs(LsaModel& m) {
  for (Eigen::Index k = 0; k < m.V.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < m.V.rows(); ++i) {
      const double a = std::abs(m.V(i, k));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (m.V.rows() > 0 && m.V(arg, k) < 0.0) {
      m.V.col(k) *= -1.0;
      m.U.col(k) *= -1.0;
    }
  }
}

inline LsaModel take_leading(const Eigen::MatrixXd& U, const Eigen::VectorXd& S, const Eigen::MatrixXd& V, int r) {
  LsaModel m;
  m.r = r;
  m.U = U.leftCols(r);
  m.S = S.head(r);
  m.V = V.leftCols(r);
  normalize_signs(m);
  return m;
}

}  // namespace detail

inline LsaModel truncated_svd(const SparseMatrix& X, int r, const SvdOptions& opt = {}) {
  const Eigen::Index n = X.rows(), V = X.cols();
  const Eigen::Index full = std::min(n, V);
  if (r < 1 || r > full)
    throw InvalidArgument("svd: component count " + std::to_string(r) + " outside [1, " + std::to_string(full) + "]");

  if (std::max(n, V) <= opt.dense_threshold || r + opt.oversampling >= full) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(X), Eigen::ComputeThinU | Eigen::ComputeThinV);
    return detail::take_leading(svd.matrixU(), svd.singularValues(), svd.matrixV(), r);
  }

  const Eigen::Index l = std::min<Eigen::Index>(r + opt.oversampling, full);
  Rng rng = derive_rng(opt.seed, 0x5bd1e995);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd omega(V, l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < V; ++i) omega(i, j) = gauss(rng);

  const SparseMatrix Xt = X.transpose();
  Eigen::MatrixXd Q = detail::orthonormal_basis(X * omega);
  for (int it = 0; it < opt.power_iterations; ++it) {
    const Eigen::MatrixXd Z = detail::orthonormal_basis(Xt * Q);
    Q = detail::orthonormal_basis(X * Z);
  }
  const Eigen::MatrixXd B = (Xt * Q).transpose();  // l x V
  Eigen::BDCSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return detail::take_leading(Q * svd.matrixU(), svd.singularValues(), svd.matrixV(), r);
}

}  // namespace concierge
