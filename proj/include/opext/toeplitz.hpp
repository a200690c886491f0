#pragma once

#include <string>
#include <utility>
#include <vector>

#include "opext/asymptotics.hpp"
#include "opext/linalg.hpp"
#include "opext/tuple.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// The Toeplitz space of a tuple -- all A with T_i* A T_i = A for every i
// (the Brown-Halmos relations) -- and commutants, both computed as joint
// null spaces of vectorized linear maps in one SVD.
// ---------------------------------------------------------------------------

enum class SpaceKind { toeplitz, commutant };

struct OperatorSubspace {
  Index n = 0;          // operators act on C^n
  SubspaceBasis basis;  // orthonormal in C^{n^2}
  SpaceKind kind = SpaceKind::toeplitz;

  Index dim() const { return basis.dim(); }
  CMatrix element(Index i) const { return unvec(basis.vectors.col(i), n, n); }
};

/// Stacked matrix of the d maps A -> T_i* A T_i - A on vec coordinates.
inline CMatrix brown_halmos_map(const OperatorTuple& t) {
  const Index n = t.n;
  CMatrix stacked(t.d() * n * n, n * n);
  const CMatrix eye = CMatrix::Identity(n * n, n * n);
  for (Index i = 0; i < t.d(); ++i)
    stacked.middleRows(i * n * n, n * n) =
        kron(t.T[i].transpose(), t.T[i].adjoint()) - eye;
  return stacked;
}

/// Stacked matrix of the maps X -> T_i X - X T_i (Sylvester form).
inline CMatrix commutator_map(const std::vector<CMatrix>& ops, Index n) {
  CMatrix stacked(static_cast<Index>(ops.size()) * n * n, n * n);
  const CMatrix eye = CMatrix::Identity(n, n);
  for (Index i = 0; i < static_cast<Index>(ops.size()); ++i)
    stacked.middleRows(i * n * n, n * n) =
        kron(eye, ops[i]) - kron(ops[i].transpose(), eye);
  return stacked;
}

/// Orthonormal basis of the Toeplitz space. The result is *-closed; the
/// adjoint of every basis element is checked to lie back in the span.
inline OperatorSubspace toeplitz_basis(const OperatorTuple& t, double tol = 1e-9) {
  OperatorSubspace out;
  out.n = t.n;
  out.kind = SpaceKind::toeplitz;
  out.basis = null_space(brown_halmos_map(t), tol);
  for (Index i = 0; i < out.dim(); ++i) {
    const double res = span_membership_residual(out.basis, vec(out.element(i).adjoint()));
    if (res > 1e-8)
      throw inconsistency_error("toeplitz_basis: computed space is not *-closed (residual " +
                                std::to_string(res) + ")");
  }
  return out;
}

inline OperatorSubspace commutant_basis(const std::vector<CMatrix>& ops,
                                        double tol = 1e-9) {
  if (ops.empty()) throw validation_error("commutant_basis: no operators given");
  const Index n = ops[0].rows();
  OperatorSubspace out;
  out.n = n;
  out.kind = SpaceKind::commutant;
  out.basis = null_space(commutator_map(ops, n), tol);
  return out;
}

inline OperatorSubspace commutant_basis(const OperatorTuple& t, double tol = 1e-9) {
  return commutant_basis(t.T, tol);
}

/// Brown-Halmos membership test: max_i ||T_i* A T_i - A||.
inline std::pair<bool, double> is_toeplitz(const CMatrix& a, const OperatorTuple& t,
                                           double tol = 1e-8) {
  double res = 0.0;
  for (Index i = 0; i < t.d(); ++i)
    res = std::max(res, op_norm(t.T[i].adjoint() * a * t.T[i] - a));
  return {res <= tol, res};
}

struct NontrivialityCertificate {
  Index toeplitz_dim = 0;
  double q_norm = 0.0;
  double spectral_radius = 0.0;
  bool nontrivial = false;
  ValidationReport report;
};

/// The three-way certificate: the Toeplitz space is nontrivial iff Q != 0
/// iff the product's adjoint is not pure. A disagreement is a tolerance
/// failure and is thrown, never smoothed over.
inline NontrivialityCertificate nontriviality_certificate(
    const OperatorTuple& t, const RunConfig& config = {}) {
  NontrivialityCertificate cert;
  const CMatrix p = product_contraction(t);
  AsymptoticLimit limit =
      asymptotic_limit(p, config.tol * 1e-2, config.max_doublings, config.purity_tol);
  OperatorSubspace space = toeplitz_basis(t, config.rank_tol);
  cert.toeplitz_dim = space.dim();
  cert.q_norm = op_norm(limit.Q);
  cert.spectral_radius = limit.spectral_radius;
  const bool dim_positive = cert.toeplitz_dim > 0;
  const bool q_positive = cert.q_norm > config.purity_tol;
  const bool not_pure = !is_adjoint_pure(t, limit, config.purity_tol);
  cert.nontrivial = dim_positive;
  cert.report.add_floor("toeplitz-dim-vs-q",
                        "nontriviality-equivalence",
                        (dim_positive == q_positive) ? 1.0 : 0.0, 0.5);
  cert.report.add_floor("q-vs-purity", "nontriviality-equivalence",
                        (q_positive == not_pure) ? 1.0 : 0.0, 0.5);
  if (dim_positive != q_positive || q_positive != not_pure)
    throw inconsistency_error(
        "nontriviality_certificate: equivalence violated (dim = " +
        std::to_string(cert.toeplitz_dim) + ", ||Q|| = " + std::to_string(cert.q_norm) +
        ", spectral radius = " + std::to_string(cert.spectral_radius) + ")");
  return cert;
}

}  // namespace opext
