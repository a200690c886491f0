#pragma once

#include <cmath>
#include <string>

#include "opext/linalg.hpp"
#include "opext/tuple.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// The asymptotic limit Q = lim (P*)^n P^n of a contraction P, computed by
// repeated squaring P -> P^2 so the power doubles per step, and the purity
// dichotomy it certifies. The iterate sequence is decreasing in the PSD
// order; that monotonicity is checked at every step rather than assumed.
// ---------------------------------------------------------------------------

/// Moduli strictly inside this band around 1 make the pure/non-pure question
/// numerically ill-posed; generators avoid the band, user input gets flagged.
inline constexpr double kUnimodularBand = 1e-4;

struct AsymptoticLimit {
  CMatrix Q;
  int iterations = 0;       // number of squarings performed
  double residual = 0.0;    // ||Q_{2k} - Q_k|| at stop
  bool pure = false;        // true iff ||Q|| <= purity_tol
  bool indeterminate = false;  // spectrum inside the critical band
  double spectral_radius = 0.0;
};

inline AsymptoticLimit asymptotic_limit(const CMatrix& p, double tol = 1e-10,
                                        int max_doublings = 60,
                                        double purity_tol = 1e-6) {
  if (p.rows() != p.cols())
    throw validation_error("asymptotic_limit: matrix not square");
  const Index n = p.rows();
  const double norm_p = op_norm(p);
  if (norm_p > 1.0 + 1e-8)
    throw validation_error("asymptotic_limit: ||P|| = " + std::to_string(norm_p) +
                           " exceeds 1");

  AsymptoticLimit out;
  out.spectral_radius = spectral_radius(p);
  Eigen::ComplexEigenSolver<CMatrix> es(p, /*computeEigenvectors=*/false);
  for (Index i = 0; i < n; ++i) {
    const double mod = std::abs(es.eigenvalues()(i));
    if (mod > 1.0 - kUnimodularBand && mod < 1.0 - 1e-8) out.indeterminate = true;
  }

  if (out.spectral_radius <= 1.0 - kUnimodularBand) {
    out.Q = CMatrix::Zero(n, n);
    out.pure = true;
    return out;
  }

  // Normalize away a sub-roundoff norm excess so that squaring cannot
  // amplify it; the relative perturbation is at most 1e-8.
  CMatrix pk = (norm_p > 1.0) ? CMatrix(p / norm_p) : p;
  CMatrix q = hermitize(pk.adjoint() * pk);
  for (int k = 1; k <= max_doublings; ++k) {
    pk = pk * pk;
    CMatrix q_next = hermitize(pk.adjoint() * pk);
    const double drop = min_hermitian_eigenvalue(q - q_next);
    if (drop < -1e-9)
      throw inconsistency_error(
          "asymptotic_limit: PSD monotonicity violated at step " +
          std::to_string(k) + " (min eigenvalue " + std::to_string(drop) + ")");
    out.residual = op_norm(q_next - q);
    out.iterations = k;
    q = std::move(q_next);
    if (out.residual <= tol) {
      out.Q = std::move(q);
      out.pure = op_norm(out.Q) <= purity_tol;
      return out;
    }
  }
  throw convergence_error("asymptotic_limit: no convergence after " +
                          std::to_string(max_doublings) +
                          " doublings (last residual " +
                          std::to_string(out.residual) + ")");
}

/// Purity of the adjoint of the product contraction, certified two ways:
/// vanishing of Q and spectral radius strictly below 1. The certificates
/// must agree; disagreement means a tolerance broke down, never a verdict.
inline bool is_adjoint_pure(const OperatorTuple& t, const AsymptoticLimit& limit,
                            double purity_tol = 1e-6) {
  (void)t;
  const bool by_limit = op_norm(limit.Q) <= purity_tol;
  const bool by_spectrum = limit.spectral_radius < 1.0 - 1e-8;
  if (by_limit != by_spectrum)
    throw inconsistency_error(
        "is_adjoint_pure: certificates disagree (||Q|| = " +
        std::to_string(op_norm(limit.Q)) + ", spectral radius = " +
        std::to_string(limit.spectral_radius) + ")");
  return by_limit;
}

/// For each j, Q - T_j* Q T_j must be PSD, and P must fix Q under
/// conjugation.
inline ValidationReport verify_compression_inequality(const OperatorTuple& t,
                                                      const CMatrix& q,
                                                      double tol = 1e-8) {
  ValidationReport rep;
  for (Index j = 0; j < t.d(); ++j) {
    const double mineig = min_hermitian_eigenvalue(q - t.T[j].adjoint() * q * t.T[j]);
    rep.add("compression[" + std::to_string(j) + "]", "compression-inequality",
            std::max(0.0, -mineig), tol);
  }
  const CMatrix p = product_contraction(t);
  rep.add("fixed-point", "asymptotic-limit-fixed-point",
          op_norm(p.adjoint() * q * p - q), tol);
  return rep;
}

}  // namespace opext
