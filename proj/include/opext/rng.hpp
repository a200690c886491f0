#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

#include "opext/linalg.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// Deterministic sampling. All variates are derived from raw mt19937_64 output
// with explicit arithmetic (no std::*_distribution), so a seed reproduces the
// same stream bit for bit on any standard library.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  Complex cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return Complex(re, im) / std::sqrt(2.0);
  }

  /// Uniformly random point on the unit circle.
  Complex phase() {
    const double theta = 2.0 * std::numbers::pi * uniform();
    return Complex(std::cos(theta), std::sin(theta));
  }

  CMatrix gaussian_matrix(Index rows, Index cols) {
    CMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = cgaussian();
    return m;
  }

  /// Haar-distributed unitary: QR of a complex Ginibre matrix with the
  /// R-diagonal phase ambiguity fixed.
  CMatrix haar_unitary(Index n) {
    CMatrix z = gaussian_matrix(n, n);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
      const Complex d = r(j, j);
      const double a = std::abs(d);
      q.col(j) *= (a > 0) ? d / a : Complex(1, 0);
    }
    return q;
  }

  /// Independent child stream for a named purpose.
  Rng fork(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (const char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return Rng(eng_() ^ h);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace opext
