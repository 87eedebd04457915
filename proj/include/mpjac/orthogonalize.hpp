#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/LU>

#include "mpjac/core.hpp"
#include "mpjac/norms.hpp"

namespace mpjac {

/// Reflector P = I - beta v v^T with v stored unnormalized (v_1 explicit).
template <typename Scalar>
struct HouseholderReflector {
  Vector<Scalar> v;
  Scalar beta;
};

/// Builds the reflector mapping x to -sign(x_1) ||x|| e_1, with sign(0) = +1.
/// v_1 uses the rational form -sigma/(x_1 + mu) when x_1 < 0 would cancel
/// against mu; when sigma == 0 that form is 0/0, so fall back to x_1 - mu
/// (no cancellation there: both terms have the same sign).
template <typename Derived>
HouseholderReflector<typename Derived::Scalar> house(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.size();
  if (n == 0 || x.isZero(Scalar(0)))
    throw std::invalid_argument("house: zero vector");

  Vector<Scalar> v = x;
  Scalar sigma = 0;
  for (Index i = 1; i < n; ++i) sigma += v[i] * v[i];
  const Scalar x1 = v[0];
  const Scalar mu = std::sqrt(x1 * x1 + sigma);
  Scalar v1;
  if (x1 >= Scalar(0)) {
    v1 = x1 + mu;
  } else {
    v1 = sigma == Scalar(0) ? x1 - mu : -sigma / (x1 + mu);
  }
  v[0] = v1;
  return {std::move(v), Scalar(2) / (v1 * v1 + sigma)};
}

/// D <- (I - beta v v^T) D as the rank-1 update D - (beta v)(v^T D).
template <typename Scalar, typename Block>
void reflect_left(const HouseholderReflector<Scalar>& h, Block&& d) {
  d.noalias() -= (h.beta * h.v) * (h.v.transpose() * d);
}

/// D <- D (I - beta v v^T) as the rank-1 update D - (D v)(beta v)^T.
template <typename Scalar, typename Block>
void reflect_right(const HouseholderReflector<Scalar>& h, Block&& d) {
  d.noalias() -= (d * h.v) * (h.beta * h.v.transpose());
}

template <typename Scalar>
struct QrFactors {
  Matrix<Scalar> q;
  Matrix<Scalar> r;  // upper triangular; strictly lower part exactly zero
};

/// Householder QR of a square matrix. Reflectors are applied only through
/// the rank-1 form, never as explicit P matrices, and only the trailing
/// n-k columns of Q are touched at step k. Each eliminated column is
/// explicitly zeroed below the diagonal.
template <typename Scalar>
QrFactors<Scalar> householder_qr(const Matrix<Scalar>& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("householder_qr: input is not square");
  const Index n = a.rows();
  QrFactors<Scalar> f{Matrix<Scalar>::Identity(n, n), a};
  for (Index k = 0; k + 1 < n; ++k) {
    const auto h = house(f.r.col(k).tail(n - k));
    reflect_left(h, f.r.bottomRightCorner(n - k, n - k));
    reflect_right(h, f.q.rightCols(n - k));
    f.r.col(k).tail(n - k - 1).setZero();
  }
  return f;
}

template <typename Scalar>
struct PolarFactor {
  Matrix<Scalar> u;
  int iterations = 0;
};

/// Thrown by polar_newton; carries the last iterate so callers can inspect
/// how far the iteration got.
class PolarNewtonError : public std::runtime_error {
 public:
  PolarNewtonError(const std::string& msg, Matrix<double> last, int iters)
      : std::runtime_error(msg), last_iterate(std::move(last)), iterations(iters) {}

  Matrix<double> last_iterate;
  int iterations;
};

/// Polar factor of a nonsingular matrix by the Newton iteration
/// X <- (X + X^{-T})/2, with the inverse from LU with partial pivoting.
/// Stops once ||X^T X - I||_F <= tol; throws if the iterate goes singular
/// to working precision or the iteration budget runs out.
template <typename Scalar>
PolarFactor<Scalar> polar_newton(const Matrix<Scalar>& a, Scalar tol,
                                 int max_iters) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("polar_newton: input is not square");
  const Index n = a.rows();
  Matrix<Scalar> x = a;
  const Matrix<Scalar> id = Matrix<Scalar>::Identity(n, n);
  for (int k = 1; k <= max_iters; ++k) {
    Eigen::PartialPivLU<Matrix<Scalar>> lu(x);
    const Vector<Scalar> d = lu.matrixLU().diagonal().cwiseAbs();
    if (d.minCoeff() <=
        Scalar(n) * Scalar(unit_roundoff_v<Scalar>) * d.maxCoeff())
      throw PolarNewtonError("polar_newton: iterate is singular to working precision",
                             x.template cast<double>(), k - 1);
    Matrix<Scalar> xinv = lu.inverse();
    x = (x + xinv.transpose()) / Scalar(2);
    if (fro_norm(x.transpose() * x - id) <= tol) return {std::move(x), k};
  }
  throw PolarNewtonError("polar_newton: no convergence within max_iters",
                         x.template cast<double>(), max_iters);
}

/// One Newton-Schulz step X (3I - X^T X) / 2; exactly two matrix products.
template <typename Scalar>
Matrix<Scalar> newton_schulz_step(const Matrix<Scalar>& x) {
  const Index n = x.cols();
  Matrix<Scalar> g = Scalar(3) * Matrix<Scalar>::Identity(n, n);
  g.noalias() -= x.transpose() * x;
  Matrix<Scalar> out(x.rows(), n);
  out.noalias() = x * g;
  out *= Scalar(0.5);
  return out;
}

/// Dimension at and above which the fixed-count rule takes three steps.
inline constexpr Index newton_schulz_large_n = 52400;

/// Fixed-count Newton-Schulz orthogonalization of a nearly orthogonal
/// matrix: two steps, or three once the order reaches 52400, with no
/// convergence test. The guard ||Q^T Q - I||_F <= 0.1 keeps every singular
/// value inside (0, sqrt(3)), where the iteration converges; outside it the
/// fixed count would silently diverge, so violation is an error.
/// n_override substitutes the dimension used by the step-count rule only.
template <typename Scalar>
PolarFactor<Scalar> newton_schulz(const Matrix<Scalar>& q,
                                  std::optional<Index> n_override = {}) {
  if (q.rows() != q.cols())
    throw std::invalid_argument("newton_schulz: input is not square");
  const Index n = q.rows();
  const Scalar defect =
      fro_norm(Matrix<Scalar>(q.transpose() * q - Matrix<Scalar>::Identity(n, n)));
  if (!(defect <= Scalar(0.1)))
    throw std::domain_error(
        "newton_schulz: input is not nearly orthogonal (||Q^T Q - I||_F > 0.1); "
        "use polar_newton instead");
  const Index rule_n = n_override.value_or(n);
  const int steps = rule_n >= newton_schulz_large_n ? 3 : 2;
  Matrix<Scalar> x = q;
  for (int k = 0; k < steps; ++k) x = newton_schulz_step(x);
  return {std::move(x), steps};
}

}  // namespace mpjac
