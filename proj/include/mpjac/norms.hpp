#pragma once

#include <cmath>

#include "mpjac/core.hpp"

namespace mpjac {

/// Frobenius norm, sqrt of the sum of squared entries.
template <typename Derived>
typename Derived::RealScalar fro_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

/// Frobenius norm of the off-diagonal part. Summing the off-diagonal
/// squares directly (rather than subtracting the diagonal from ||A||_F^2)
/// keeps the result accurate when the matrix is nearly diagonal, which is
/// exactly where the Jacobi stopping logic needs it.
template <typename Scalar>
Scalar off_norm(const Matrix<Scalar>& a) {
  const Index n = a.rows();
  Scalar sum = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

template <typename Scalar>
Scalar off_norm(const SymMatrix<Scalar>& a) {
  return off_norm(a.mat());
}

/// 2-norm estimate for a symmetric matrix by power iteration from the
/// normalized all-ones vector. Deterministic; never exceeds ||A||_2.
template <typename Scalar>
Scalar two_norm_estimate(const Matrix<Scalar>& a, int iters = 100) {
  const Index n = a.rows();
  if (n == 0) return Scalar(0);
  Vector<Scalar> v = Vector<Scalar>::Constant(n, Scalar(1) / std::sqrt(Scalar(n)));
  Scalar sigma = 0;
  for (int k = 0; k < iters; ++k) {
    Vector<Scalar> w = a * v;
    sigma = w.norm();
    if (sigma == Scalar(0)) return Scalar(0);
    v = w / sigma;
  }
  return sigma;
}

template <typename Scalar>
Scalar two_norm_estimate(const SymMatrix<Scalar>& a, int iters = 100) {
  return two_norm_estimate(a.mat(), iters);
}

/// 2-norm estimate for a general (possibly non-symmetric) matrix: power
/// iteration on A^T A. Used for residuals ||AQ - Q Lambda||.
template <typename Scalar>
Scalar two_norm_estimate_general(const Matrix<Scalar>& a, int iters = 100) {
  const Index n = a.cols();
  if (n == 0 || a.rows() == 0) return Scalar(0);
  Vector<Scalar> v = Vector<Scalar>::Constant(n, Scalar(1) / std::sqrt(Scalar(n)));
  Scalar sigma = 0;
  for (int k = 0; k < iters; ++k) {
    Vector<Scalar> w = a * v;
    sigma = w.norm();
    if (sigma == Scalar(0)) return Scalar(0);
    Vector<Scalar> z = a.transpose() * w;
    const Scalar zn = z.norm();
    if (zn == Scalar(0)) return sigma;
    v = z / zn;
  }
  return sigma;
}

}  // namespace mpjac
