#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "mpjac/core.hpp"
#include "mpjac/orthogonalize.hpp"

namespace mpjac {

/// Eigenvalue-magnitude distribution of a generated test matrix.
enum class Mode { Geo, Ari };

/// Recipe for a reproducible symmetric test matrix: order n, 2-norm
/// condition number kappa, magnitude distribution, RNG seed.
struct TestMatrixSpec {
  Index n;
  double kappa;
  Mode mode;
  std::uint64_t seed;
};

inline void validate(const TestMatrixSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("TestMatrixSpec: n must be >= 2");
  if (!(spec.kappa >= 1.0))
    throw std::invalid_argument("TestMatrixSpec: kappa must be >= 1");
}

namespace rng {

// Deterministic RNG plumbing, pinned so generated matrices are reproducible:
//  - substream(seed, id) is mt19937_64 seeded with a splitmix64 mix of seed
//    and id; stream 0 feeds reflector vectors, stream 1 feeds sign flips;
//  - uniforms take the top 53 bits of one engine draw;
//  - normal variates come from the Marsaglia polar transform of those
//    uniforms (a pair of uniforms per accepted candidate, the spare kept).

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ (stream * 0xA24BAED4963EE407ull)));
}

inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1p-53;
}

class NormalSampler {
 public:
  double operator()(std::mt19937_64& eng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01(eng) - 1.0;
      v = 2.0 * uniform01(eng) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rng

/// Singular values sigma_1 = 1 >= ... >= sigma_n = 1/kappa.
/// Geo: sigma_i = kappa^(-(i-1)/(n-1));  Ari: sigma_i = 1 - (i-1)(1-1/kappa)/(n-1).
inline Vector<double> singular_value_profile(const TestMatrixSpec& spec) {
  validate(spec);
  const Index n = spec.n;
  Vector<double> sigma(n);
  if (spec.mode == Mode::Geo) {
    const double factor = std::pow(spec.kappa, -1.0 / double(n - 1));
    for (Index i = 0; i < n; ++i) sigma[i] = std::pow(factor, double(i));
  } else {
    const double step = (1.0 - 1.0 / spec.kappa) / double(n - 1);
    for (Index i = 0; i < n; ++i) sigma[i] = 1.0 - double(i) * step;
  }
  return sigma;
}

/// Random orthogonal matrix: n-1 Householder reflectors with standard
/// normal vectors applied to the identity (stage k touches rows k..n-1),
/// then a random sign on the last row so n = 1 yields [+-1].
inline Matrix<double> random_orthogonal(Index n, std::mt19937_64& eng) {
  if (n < 1) throw std::invalid_argument("random_orthogonal: n must be >= 1");
  rng::NormalSampler normal;
  Matrix<double> q = Matrix<double>::Identity(n, n);
  for (Index k = n - 2; k >= 0; --k) {
    Vector<double> x(n - k);
    for (Index i = 0; i < x.size(); ++i) x[i] = normal(eng);
    const auto h = house(x);
    reflect_left(h, q.bottomRows(n - k));
  }
  if (normal(eng) < 0.0) q.row(n - 1) = -q.row(n - 1);
  return q;
}

/// Symmetric test matrix A = Q diag(+-sigma) Q^T, re-symmetrized so a_ij and
/// a_ji are bit-equal. Interior singular values (indices 2..n-1) receive
/// independent random signs, so A is generally indefinite; the endpoint
/// values stay positive and kappa_2(A) is exactly the magnitude ratio.
/// n = 2 has no interior entries and skips the sign flips.
inline SymMatrix<double> generate(const TestMatrixSpec& spec) {
  validate(spec);
  const Index n = spec.n;
  Vector<double> sigma = singular_value_profile(spec);

  auto signs = rng::substream(spec.seed, 1);
  for (Index i = 1; i + 1 < n; ++i)
    if (rng::uniform01(signs) < 0.5) sigma[i] = -sigma[i];

  auto reflectors = rng::substream(spec.seed, 0);
  const Matrix<double> q = random_orthogonal(n, reflectors);
  Matrix<double> a = q * sigma.asDiagonal() * q.transpose();
  symmetrize(a);
  return SymMatrix<double>(std::move(a));
}

}  // namespace mpjac
