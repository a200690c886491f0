#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opext/linalg.hpp"
#include "opext/rng.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// A commuting tuple of contractions on C^n, its product contraction, and
// reproducible generators of test instances. Invalid tuples are rejected,
// never rescaled.
// ---------------------------------------------------------------------------

struct OperatorTuple {
  Index n = 0;
  std::vector<CMatrix> T;

  Index d() const { return static_cast<Index>(T.size()); }
};

/// Commutativity and contractivity residuals for every pair/entry.
inline ValidationReport validate(const OperatorTuple& t, double val_tol = 1e-8) {
  ValidationReport rep;
  if (t.d() < 1) {
    rep.add_floor("tuple-length", "commuting-tuple", 0.0, 0.5);
    return rep;
  }
  for (Index i = 0; i < t.d(); ++i) {
    if (t.T[i].rows() != t.n || t.T[i].cols() != t.n)
      throw validation_error("validate: operator " + std::to_string(i) +
                             " is not " + std::to_string(t.n) + "x" +
                             std::to_string(t.n));
    rep.add("contraction[" + std::to_string(i) + "]", "contractivity",
            std::max(0.0, op_norm(t.T[i]) - 1.0), val_tol);
  }
  for (Index i = 0; i < t.d(); ++i)
    for (Index j = i + 1; j < t.d(); ++j)
      rep.add("commute[" + std::to_string(i) + "," + std::to_string(j) + "]",
              "commutativity", op_norm(t.T[i] * t.T[j] - t.T[j] * t.T[i]),
              val_tol);
  return rep;
}

inline void require_valid(const OperatorTuple& t, double val_tol = 1e-8) {
  ValidationReport rep = validate(t, val_tol);
  if (!rep.passed())
    throw validation_error("tuple is not a commuting contraction tuple (max residual " +
                           std::to_string(rep.max_residual()) + ")");
}

/// Ordered product T_1 T_2 ... T_d.
inline CMatrix product_contraction(const OperatorTuple& t) {
  if (t.d() < 1) throw validation_error("product_contraction: empty tuple");
  CMatrix p = t.T[0];
  for (Index j = 1; j < t.d(); ++j) p = p * t.T[j];
  return p;
}

// ---------------------------------------------------------------------------
// Instance generators. Deterministic in the seed. The strict-contraction
// margin 0.9 keeps generated spectra away from the unit circle so the
// pure/non-pure dichotomy never sits on the boundary.
// ---------------------------------------------------------------------------

inline constexpr double kStrictMargin = 0.9;

/// Simultaneously diagonalizable tuple T_j = V D_j V* with Haar-random V.
/// Exactly `unimodular_count` shared coordinates carry |D_j| = 1 in every
/// operator; the remaining moduli stay at or below the strict margin.
inline OperatorTuple gen_commuting_normal(Index n, Index d,
                                          Index unimodular_count,
                                          std::uint64_t seed) {
  if (n < 1 || d < 1)
    throw validation_error("gen_commuting_normal: need n >= 1 and d >= 1");
  if (unimodular_count < 0 || unimodular_count > n)
    throw validation_error("gen_commuting_normal: unimodular_count out of range");
  Rng rng(seed);
  const CMatrix v = rng.haar_unitary(n);
  OperatorTuple t;
  t.n = n;
  for (Index j = 0; j < d; ++j) {
    CVector diag(n);
    for (Index k = 0; k < n; ++k) {
      const Complex ph = rng.phase();
      diag(k) = (k < unimodular_count) ? ph : rng.uniform(0.0, kStrictMargin) * ph;
    }
    t.T.push_back(v * diag.asDiagonal() * v.adjoint());
  }
  return t;
}

/// Non-normal commuting tuple: degree-<=2 polynomials in one random
/// upper-triangular matrix, each rescaled to norm 0.95. Polynomials in a
/// single matrix commute, so validity is structural; every output is pure.
inline OperatorTuple gen_poly_tuple(Index n, Index d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw validation_error("gen_poly_tuple: need n >= 1 and d >= 1");
  Rng rng(seed);
  CMatrix m = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) m(i, j) = rng.cgaussian();
  m /= std::max(1.0, op_norm(m));
  const CMatrix eye = CMatrix::Identity(n, n);
  OperatorTuple t;
  t.n = n;
  for (Index j = 0; j < d; ++j) {
    const Complex c0 = rng.cgaussian();
    const Complex c1 = rng.cgaussian();
    const Complex c2 = rng.cgaussian();
    CMatrix tj = c0 * eye + c1 * m + c2 * m * m;
    const double norm = op_norm(tj);
    if (norm < 1e-12) tj = eye;  // astronomically unlikely; keep deterministic
    t.T.push_back(tj * (0.95 / op_norm(tj)));
  }
  return t;
}

/// Blockwise direct sum T_j = T_j^a (+) T_j^b of two tuples of equal length.
inline OperatorTuple gen_mixed_direct_sum(const OperatorTuple& a,
                                          const OperatorTuple& b) {
  if (a.d() == 0) return b;
  if (b.d() == 0) return a;
  if (a.d() != b.d())
    throw validation_error("gen_mixed_direct_sum: tuple lengths differ");
  OperatorTuple t;
  t.n = a.n + b.n;
  for (Index j = 0; j < a.d(); ++j) {
    CMatrix block = CMatrix::Zero(t.n, t.n);
    block.topLeftCorner(a.n, a.n) = a.T[j];
    block.bottomRightCorner(b.n, b.n) = b.T[j];
    t.T.push_back(block);
  }
  return t;
}

}  // namespace opext
