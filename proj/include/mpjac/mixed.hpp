#pragma once

#include <array>
#include <chrono>
#include <stdexcept>
#include <utility>

#include "mpjac/core.hpp"
#include "mpjac/jacobi.hpp"
#include "mpjac/norms.hpp"
#include "mpjac/orthogonalize.hpp"

namespace mpjac {

/// Output of the preconditioned pipeline (and of the plain-cyclic baseline
/// wrapped in the same shape for side-by-side benchmarking).
struct MixedSolveResult {
  Matrix<double> q;          // orthogonal factor, working precision
  Vector<double> lambda;     // eigenvalues, unsorted
  double precondition_off_ratio = 0.0;  // off(A_cond) / ||A||_2
  int sweeps = 0;                       // final-stage sweep count
  double residual_ratio = 0.0;          // ||AQ - Q diag(lambda)||_2 / ||A||_2
  int low_precision_sweeps = 0;
  bool converged = true;                // final Jacobi stage converged
  SolveReport<double> final_report;     // rotation counts / off history of the
                                        // refinement stage
  std::array<double, 3> stage_seconds{};  // [0] low-precision eig,
                                          // [1] Newton-Schulz,
                                          // [2] precondition + final Jacobi
};

struct LowPrecisionEigStage {
  Matrix<double> q;  // eigenvector matrix promoted back to working precision
  SolveReport<float> report;
};

/// Thrown by low_precision_eig when the binary32 solve does not converge;
/// carries the partial eigenvector matrix, which is still a usable
/// preconditioner.
class LowPrecisionNonConvergence : public std::runtime_error {
 public:
  LowPrecisionNonConvergence(Matrix<double> q, int sweeps)
      : std::runtime_error("low_precision_eig: binary32 Jacobi did not converge"),
        partial(std::move(q)),
        sweeps(sweeps) {}

  Matrix<double> partial;
  int sweeps;
};

/// Pipeline stage 1: demote to binary32, run cyclic Jacobi there
/// (tol = u_low, at most 15 sweeps), promote the eigenvector matrix back.
/// Never throws on non-convergence; inspect report.converged.
inline LowPrecisionEigStage low_precision_eig_stage(const SymMatrix<double>& a) {
  const SymMatrix<float> a_low = demote(a);
  SpectralResult<float> r =
      jacobi_cyclic(a_low, float(unit_roundoff(Precision::Low)), 15);
  return {promote(r.v), std::move(r.report)};
}

/// Spec'd operation form of stage 1: returns the nearly orthogonal
/// eigenvector matrix or throws (with the partial result attached) when the
/// low-precision solve fails to converge.
inline Matrix<double> low_precision_eig(const SymMatrix<double>& a) {
  LowPrecisionEigStage s = low_precision_eig_stage(a);
  if (!s.report.converged)
    throw LowPrecisionNonConvergence(std::move(s.q), s.report.sweeps);
  return std::move(s.q);
}

/// A_cond = Qd^T A Qd followed by one explicit (M + M^T)/2 pass, which the
/// floating-point congruence needs before SymMatrix will accept it.
inline SymMatrix<double> precondition(const SymMatrix<double>& a,
                                      const Matrix<double>& qd) {
  if (qd.rows() != a.order() || qd.cols() != a.order())
    throw std::invalid_argument("precondition: shape mismatch");
  Matrix<double> m = qd.transpose() * a.mat() * qd;
  symmetrize(m);
  return SymMatrix<double>(std::move(m));
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

inline MixedSolveResult finish_result(const SymMatrix<double>& a, double norm_a,
                                      SpectralResult<double> final,
                                      Matrix<double> q) {
  MixedSolveResult out;
  out.lambda = std::move(final.lambda);
  out.sweeps = final.report.sweeps;
  out.converged = final.report.converged;
  out.final_report = std::move(final.report);
  out.q = std::move(q);

  if (norm_a > 0.0) {
    Matrix<double> residual = a.mat() * out.q;
    residual.noalias() -= out.q * out.lambda.asDiagonal();
    out.residual_ratio = two_norm_estimate_general(residual) / norm_a;
  }
  return out;
}

}  // namespace detail

/// Preconditioned mixed-precision eigensolver:
///   1. spectral decomposition at binary32 (cyclic Jacobi),
///   2. Newton-Schulz orthogonalization of the eigenvector matrix,
///   3. A_cond = Qd^T A Qd, refined by cyclic Jacobi at working precision,
///   4. Q = Qd V.
/// Stage-1 non-convergence degrades gracefully (the partial eigenvector
/// matrix still preconditions); final-stage non-convergence is flagged on
/// the result, not thrown.
inline MixedSolveResult solve_mixed(const SymMatrix<double>& a,
                                    double tol = unit_roundoff(Precision::Working),
                                    int max_sweeps = 10) {
  using clock = std::chrono::steady_clock;

  auto t0 = clock::now();
  LowPrecisionEigStage low = low_precision_eig_stage(a);
  const double t_low = detail::seconds_since(t0);

  t0 = clock::now();
  const PolarFactor<double> qd = newton_schulz(low.q);
  const double t_ns = detail::seconds_since(t0);

  t0 = clock::now();
  const SymMatrix<double> a_cond = precondition(a, qd.u);
  SpectralResult<double> final = jacobi_cyclic(a_cond, tol, max_sweeps);
  Matrix<double> q = qd.u * final.v;
  const double t_refine = detail::seconds_since(t0);

  const double norm_a = two_norm_estimate(a);
  MixedSolveResult out =
      detail::finish_result(a, norm_a, std::move(final), std::move(q));
  out.low_precision_sweeps = low.report.sweeps;
  out.precondition_off_ratio = norm_a > 0.0 ? off_norm(a_cond) / norm_a : 0.0;
  out.stage_seconds = {t_low, t_ns, t_refine};
  return out;
}

/// Baseline with the identical result shape: cyclic Jacobi at working
/// precision, no preconditioning. precondition_off_ratio reports
/// off(A)/||A||_2, i.e. what the final stage actually faced.
inline MixedSolveResult solve_unpreconditioned(
    const SymMatrix<double>& a,
    double tol = unit_roundoff(Precision::Working), int max_sweeps = 10) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  SpectralResult<double> final = jacobi_cyclic(a, tol, max_sweeps);
  const double t_solve = detail::seconds_since(t0);

  const double norm_a = two_norm_estimate(a);
  Matrix<double> q = std::move(final.v);
  MixedSolveResult out =
      detail::finish_result(a, norm_a, std::move(final), std::move(q));
  out.precondition_off_ratio = norm_a > 0.0 ? off_norm(a) / norm_a : 0.0;
  out.stage_seconds = {0.0, 0.0, t_solve};
  return out;
}

}  // namespace mpjac
