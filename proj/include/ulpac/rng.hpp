#pragma once

// Portable seeded randomness. SplitMix64 is a counter-based generator: the
// k-th output is a fixed hash of seed + k * golden-gamma, so any
// reimplementation reproduces the same stream from the same seed. Doubles
// are built from raw bits rather than <random> distributions, whose output
// is implementation-defined.

#include <cmath>
#include <cstdint>

#include "ulpac/matcore.hpp"

namespace ulpac {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one draw per call).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Circular complex Gaussian with E|z|^2 = 1.
  Complex complex_normal() {
    return Complex(normal(), normal()) * std::sqrt(0.5);
  }

 private:
  std::uint64_t state_;
};

/// Independent stream seed for (seed, stream) pairs.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (0xd1b54a32d192ed03ULL * (stream + 1)));
  g.next();
  return g.next();
}

inline CMatrix random_gaussian(Index n, SplitMix64& rng) {
  CMatrix g(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) g(i, j) = rng.complex_normal();
  }
  return g;
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of diag(R) folded into Q.
inline CMatrix random_unitary(Index n, SplitMix64& rng) {
  const CMatrix g = random_gaussian(n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  for (Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    const Complex phase = mag > 0 ? r(k, k) / mag : Complex(1.0);
    q.col(k) *= phase;
  }
  return q;
}

/// Hermitian matrix with spectral norm exactly 1 (up to rounding).
inline CMatrix random_hermitian_contraction(Index n, SplitMix64& rng) {
  const CMatrix g = random_gaussian(n, rng);
  CMatrix h = detail::hermitian_part(g);
  const double norm = op_norm(h);
  if (norm > 0) h /= norm;
  return h;
}

}  // namespace ulpac
