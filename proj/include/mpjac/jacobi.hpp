#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mpjac/core.hpp"
#include "mpjac/norms.hpp"

namespace mpjac {

/// One Jacobi step: indices 0 <= p < q < n and the rotation (c, s) of the
/// Givens matrix G that is the identity except G(p,p)=G(q,q)=c,
/// G(p,q)=s, G(q,p)=-s. The smaller-root choice keeps |s| <= c, c > 0
/// (rotation angle at most pi/4).
template <typename Scalar>
struct GivensPair {
  Index p;
  Index q;
  Scalar c;
  Scalar s;
};

template <typename Scalar>
struct SolveReport {
  std::int64_t rotations = 0;
  int sweeps = 0;
  std::vector<Scalar> off_history;  // off-norm after each completed sweep
  bool converged = false;
};

template <typename Scalar>
struct SpectralResult {
  Matrix<Scalar> v;       // eigenvector columns
  Vector<Scalar> lambda;  // eigenvalues, unsorted
  SolveReport<Scalar> report;
};

namespace detail {

template <typename Scalar>
void check_pair_indices(const Matrix<Scalar>& a, Index p, Index q) {
  if (!(0 <= p && p < q && q < a.rows()))
    throw std::out_of_range("jacobi: require 0 <= p < q < n");
}

}  // namespace detail

/// Rotation annihilating entry (p,q) of a symmetric matrix. t is computed
/// from the reciprocal form 1/(tau +- sqrt(1+tau^2)); the expanded root
/// -tau + sqrt(tau^2+1) cancels catastrophically for small a_pq and would
/// round to (c,s) = (1,0).
template <typename Scalar>
GivensPair<Scalar> jacobi_pair(const Matrix<Scalar>& a, Index p, Index q) {
  detail::check_pair_indices(a, p, q);
  const Scalar apq = a(p, q);
  if (apq == Scalar(0)) return {p, q, Scalar(1), Scalar(0)};
  const Scalar tau = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
  const Scalar root = std::sqrt(Scalar(1) + tau * tau);
  const Scalar t = tau >= Scalar(0) ? Scalar(1) / (tau + root)
                                    : Scalar(1) / (tau - root);
  const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
  return {p, q, c, t * c};
}

template <typename Scalar>
GivensPair<Scalar> jacobi_pair(const SymMatrix<Scalar>& a, Index p, Index q) {
  return jacobi_pair(a.mat(), p, q);
}

/// A <- G^T A G, touching only rows and columns p and q (rows first, then
/// columns, as a 2xn and an nx2 scaled update). Every other entry is left
/// bit-identical.
template <typename Scalar>
void apply_rotation_sym(Matrix<Scalar>& a, const GivensPair<Scalar>& g) {
  const Index n = a.cols();
  const Scalar c = g.c, s = g.s;
  for (Index j = 0; j < n; ++j) {
    const Scalar ap = a(g.p, j), aq = a(g.q, j);
    a(g.p, j) = c * ap - s * aq;
    a(g.q, j) = s * ap + c * aq;
  }
  for (Index i = 0; i < n; ++i) {
    const Scalar ap = a(i, g.p), aq = a(i, g.q);
    a(i, g.p) = c * ap - s * aq;
    a(i, g.q) = s * ap + c * aq;
  }
}

template <typename Scalar>
void apply_rotation_sym(SymMatrix<Scalar>& a, const GivensPair<Scalar>& g) {
  apply_rotation_sym(a.mat(), g);
}

/// V <- V G: replaces columns p and q by their rotation combination.
template <typename Scalar>
void apply_rotation_right(Matrix<Scalar>& v, const GivensPair<Scalar>& g) {
  const Index n = v.rows();
  const Scalar c = g.c, s = g.s;
  for (Index i = 0; i < n; ++i) {
    const Scalar vp = v(i, g.p), vq = v(i, g.q);
    v(i, g.p) = c * vp - s * vq;
    v(i, g.q) = s * vp + c * vq;
  }
}

/// Index pair (p < q) of an off-diagonal entry of maximum modulus.
/// Ties break to the smallest q, then the smallest p.
template <typename Scalar>
std::pair<Index, Index> max_off(const Matrix<Scalar>& a) {
  const Index n = a.rows();
  if (n < 2) throw std::invalid_argument("max_off: need n >= 2");
  Index bp = 0, bq = 1;
  Scalar best = -1;
  for (Index q = 1; q < n; ++q) {
    for (Index p = 0; p < q; ++p) {
      const Scalar v = std::abs(a(p, q));
      if (v > best) {
        best = v;
        bp = p;
        bq = q;
      }
    }
  }
  return {bp, bq};
}

template <typename Scalar>
std::pair<Index, Index> max_off(const SymMatrix<Scalar>& a) {
  return max_off(a.mat());
}

namespace detail {

/// Incremental argmax over the superdiagonal for the classical solver.
/// Keeps, per column q, the maximum |a(p,q)| over p < q together with the
/// smallest attaining p; the global argmax scans columns in ascending q
/// with strict improvement, reproducing max_off's tie-break exactly.
/// After a rotation only rows/columns p,q changed, so columns p and q are
/// recomputed and every other column is patched (or recomputed when its
/// cached maximum could have moved).
template <typename Scalar>
class MaxOffTracker {
 public:
  explicit MaxOffTracker(const Matrix<Scalar>& a) { rebuild(a); }

  void rebuild(const Matrix<Scalar>& a) {
    const Index n = a.rows();
    val_.assign(static_cast<std::size_t>(n), Scalar(-1));
    row_.assign(static_cast<std::size_t>(n), 0);
    for (Index q = 1; q < n; ++q) recompute(a, q);
  }

  void update(const Matrix<Scalar>& a, Index p, Index q) {
    const Index n = a.rows();
    if (p >= 1) recompute(a, p);
    recompute(a, q);
    for (Index j = 1; j < n; ++j) {
      if (j == p || j == q) continue;
      const bool p_in = p < j, q_in = q < j;
      if (!p_in && !q_in) continue;
      if ((p_in && row_[j] == p) || (q_in && row_[j] == q)) {
        recompute(a, j);
        continue;
      }
      if (p_in) consider(a, p, j);
      if (q_in) consider(a, q, j);
    }
  }

  std::pair<Index, Index> argmax() const {
    Index bq = 1;
    Scalar best = val_[1];
    for (Index q = 2; q < static_cast<Index>(val_.size()); ++q) {
      if (val_[q] > best) {
        best = val_[q];
        bq = q;
      }
    }
    return {row_[bq], bq};
  }

 private:
  void recompute(const Matrix<Scalar>& a, Index q) {
    Scalar best = -1;
    Index bp = 0;
    for (Index p = 0; p < q; ++p) {
      const Scalar v = std::abs(a(p, q));
      if (v > best) {
        best = v;
        bp = p;
      }
    }
    val_[q] = best;
    row_[q] = bp;
  }

  void consider(const Matrix<Scalar>& a, Index p, Index q) {
    const Scalar v = std::abs(a(p, q));
    if (v > val_[q] || (v == val_[q] && p < row_[q])) {
      val_[q] = v;
      row_[q] = p;
    }
  }

  std::vector<Scalar> val_;  // indexed by column q (entry 0 unused)
  std::vector<Index> row_;
};

template <typename Scalar>
SpectralResult<Scalar> trivial_result(const Matrix<Scalar>& a) {
  SpectralResult<Scalar> r{Matrix<Scalar>::Identity(a.rows(), a.rows()),
                           a.diagonal(), {}};
  r.report.converged = true;
  return r;
}

}  // namespace detail

/// Classical Jacobi: rotate away the largest off-diagonal entry until
/// |a_pq| <= tol ||A|| sqrt(|a_pp a_qq|). The working matrix is
/// re-symmetrized every n^2 rotations; on convergence the off-diagonal is
/// discarded and the diagonal returned as the eigenvalues. ||A|| is the
/// power-iteration estimate computed once at entry.
///
/// Note the tolerance asymmetry against jacobi_cyclic, whose threshold test
/// carries no ||A|| factor; both forms are kept as is, so callers comparing
/// the two should normalize through tol.
template <typename Scalar>
SpectralResult<Scalar> jacobi_classical(
    const SymMatrix<Scalar>& input,
    Scalar tol = Scalar(unit_roundoff_v<Scalar>)) {
  if (!(tol > Scalar(0)))
    throw std::invalid_argument("jacobi_classical: tol must be positive");
  const Index n = input.order();
  if (n < 2) return detail::trivial_result(input.mat());
  const std::int64_t rotations_per_sweep = std::int64_t(n) * (n - 1) / 2;

  Matrix<Scalar> a = input.mat();
  SpectralResult<Scalar> r{Matrix<Scalar>::Identity(n, n), Vector<Scalar>(n), {}};
  const Scalar tol1 = tol * two_norm_estimate(a);
  detail::MaxOffTracker<Scalar> tracker(a);

  while (true) {
    if (r.report.rotations % (std::int64_t(n) * n) == 0) {
      symmetrize(a);
      tracker.rebuild(a);
    }
    const auto [p, q] = tracker.argmax();
    if (std::abs(a(p, q)) > tol1 * std::sqrt(std::abs(a(p, p) * a(q, q)))) {
      const GivensPair<Scalar> g = jacobi_pair(a, p, q);
      apply_rotation_sym(a, g);
      apply_rotation_right(r.v, g);
      tracker.update(a, p, q);
      ++r.report.rotations;
      if (r.report.rotations % rotations_per_sweep == 0) {
        ++r.report.sweeps;
        r.report.off_history.push_back(off_norm(a));
      }
    } else {
      r.report.converged = true;
      break;
    }
  }
  r.lambda = a.diagonal();
  return r;
}

/// Cyclic-by-row Jacobi: sweeps pairs (p,q) in row order, rotating those
/// with |a_pq| > tol sqrt(|a_pp a_qq|). After every sweep that rotated,
/// the working matrix is re-symmetrized; a sweep with no rotations means
/// convergence (the off-diagonal is discarded). Hitting max_sweeps returns
/// converged = false with the partial result.
template <typename Scalar>
SpectralResult<Scalar> jacobi_cyclic(
    const SymMatrix<Scalar>& input,
    Scalar tol = Scalar(unit_roundoff_v<Scalar>), int max_sweeps = 10) {
  if (!(tol > Scalar(0)))
    throw std::invalid_argument("jacobi_cyclic: tol must be positive");
  if (max_sweeps < 1)
    throw std::invalid_argument("jacobi_cyclic: max_sweeps must be >= 1");
  const Index n = input.order();
  if (n < 2) return detail::trivial_result(input.mat());

  Matrix<Scalar> a = input.mat();
  SpectralResult<Scalar> r{Matrix<Scalar>::Identity(n, n), Vector<Scalar>(n), {}};

  while (r.report.sweeps < max_sweeps) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) > tol * std::sqrt(std::abs(a(p, p) * a(q, q)))) {
          rotated = true;
          const GivensPair<Scalar> g = jacobi_pair(a, p, q);
          apply_rotation_sym(a, g);
          apply_rotation_right(r.v, g);
          ++r.report.rotations;
        }
      }
    }
    if (!rotated) {
      r.report.converged = true;
      break;
    }
    symmetrize(a);
    ++r.report.sweeps;
    r.report.off_history.push_back(off_norm(a));
  }
  r.lambda = a.diagonal();
  return r;
}

/// Reorders eigenvalues ascending and permutes the eigenvector columns to
/// match.
template <typename Scalar>
void sort_spectrum(SpectralResult<Scalar>& r) {
  const Index n = r.lambda.size();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index(0));
  std::sort(perm.begin(), perm.end(),
            [&](Index i, Index j) { return r.lambda[i] < r.lambda[j]; });
  Vector<Scalar> lambda(n);
  Matrix<Scalar> v(r.v.rows(), n);
  for (Index k = 0; k < n; ++k) {
    lambda[k] = r.lambda[perm[k]];
    v.col(k) = r.v.col(perm[k]);
  }
  r.lambda = std::move(lambda);
  r.v = std::move(v);
}

}  // namespace mpjac
