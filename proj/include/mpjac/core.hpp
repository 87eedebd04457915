#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace mpjac {

using Index = Eigen::Index;

/// Dense storage is row-major throughout: the Jacobi kernels update rows
/// (p,q) in the inner loops and the text format is row-oriented.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// The two precision levels the solver pipeline moves between.
enum class Precision { Low, Working };

template <typename Scalar>
struct precision_traits;

template <>
struct precision_traits<float> {
  static constexpr Precision tag = Precision::Low;
  static constexpr double unit_roundoff = 0x1p-24;
};

template <>
struct precision_traits<double> {
  static constexpr Precision tag = Precision::Working;
  static constexpr double unit_roundoff = 0x1p-53;
};

template <typename Scalar>
inline constexpr double unit_roundoff_v = precision_traits<Scalar>::unit_roundoff;

constexpr double unit_roundoff(Precision p) {
  return p == Precision::Low ? 0x1p-24 : 0x1p-53;
}

/// Averages a and a^T in place, entry by entry, so that a(i,j) and a(j,i)
/// end up bit-equal.
template <typename Scalar>
void symmetrize(Matrix<Scalar>& a) {
  const Index n = a.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const Scalar avg = (a(i, j) + a(j, i)) / Scalar(2);
      a(i, j) = avg;
      a(j, i) = avg;
    }
  }
}

/// Symmetry test used by the SymMatrix constructor:
/// max |a_ij - a_ji| <= 8 n u max |a_ij| with u the scalar's unit roundoff.
/// The slack absorbs (A + A^T)/2 re-symmetrization noise.
template <typename Scalar>
bool is_symmetric_within_tolerance(const Matrix<Scalar>& a) {
  if (a.rows() != a.cols()) return false;
  const Index n = a.rows();
  if (n == 0) return true;
  const Scalar amax = a.cwiseAbs().maxCoeff();
  const Scalar tol =
      Scalar(8) * Scalar(n) * Scalar(unit_roundoff_v<Scalar>) * amax;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

/// Square matrix that was symmetric (within tolerance) when constructed.
///
/// The checked constructor throws on non-symmetric input; unchecked() only
/// requires squareness and exists for general square intermediates that
/// share this storage. Solvers that mutate the payload keep it symmetric
/// up to rounding and re-symmetrize periodically.
template <typename Scalar>
class SymMatrix {
 public:
  static constexpr Precision precision = precision_traits<Scalar>::tag;

  explicit SymMatrix(Matrix<Scalar> a) : m_(std::move(a)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("SymMatrix: input is not square");
    if (!is_symmetric_within_tolerance(m_))
      throw std::invalid_argument("SymMatrix: input is not symmetric");
  }

  static SymMatrix unchecked(Matrix<Scalar> a) {
    if (a.rows() != a.cols())
      throw std::invalid_argument("SymMatrix: input is not square");
    return SymMatrix(relaxed_tag{}, std::move(a));
  }

  Index order() const { return m_.rows(); }

  const Matrix<Scalar>& mat() const { return m_; }
  Matrix<Scalar>& mat() { return m_; }

 private:
  struct relaxed_tag {};
  SymMatrix(relaxed_tag, Matrix<Scalar> a) : m_(std::move(a)) {}

  Matrix<Scalar> m_;
};

/// Rounds each entry to the nearest binary32 value (ties to even, the IEEE
/// default). Entries exceeding the binary32 range throw; subnormal
/// underflow to zero is accepted.
inline Matrix<float> demote(const Matrix<double>& a) {
  Matrix<float> out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double x = a(i, j);
      const float y = static_cast<float>(x);
      if (std::isfinite(x) && !std::isfinite(y))
        throw std::range_error("demote: entry overflows binary32 range");
      out(i, j) = y;
    }
  }
  return out;
}

/// Exact embedding of binary32 values into binary64.
inline Matrix<double> promote(const Matrix<float>& a) {
  return a.cast<double>();
}

inline SymMatrix<float> demote(const SymMatrix<double>& a) {
  return SymMatrix<float>(demote(a.mat()));
}

inline SymMatrix<double> promote(const SymMatrix<float>& a) {
  return SymMatrix<double>(promote(a.mat()));
}

}  // namespace mpjac
