#pragma once

// Brute-force reference implementations used only by the test harness. They
// deliberately avoid every shortcut of the main path -- no repeated squaring,
// no Kronecker identities, row-major constraint indexing instead of
// column-stacking -- so the two routes cannot share a bug.

#include <string>
#include <vector>

#include "opext/linalg.hpp"
#include "opext/tuple.hpp"
#include "opext/types.hpp"

namespace opext::oracles {

struct OracleResult {
  std::string quantity;
  CMatrix oracle_value;
  CMatrix main_value;
  double discrepancy = 0.0;

  bool accepted(double oracle_tol = 1e-5) const { return discrepancy <= oracle_tol; }
};

inline OracleResult compare(std::string quantity, CMatrix oracle_value,
                            CMatrix main_value) {
  OracleResult r;
  r.quantity = std::move(quantity);
  r.discrepancy = op_norm(oracle_value - main_value);
  r.oracle_value = std::move(oracle_value);
  r.main_value = std::move(main_value);
  return r;
}

/// (P*)^N P^N by N literal multiplications.
inline CMatrix oracle_q(const CMatrix& p, long n_steps = 1L << 16) {
  CMatrix power = CMatrix::Identity(p.rows(), p.cols());
  for (long k = 0; k < n_steps; ++k) power = power * p;
  return power.adjoint() * power;
}

/// Dimension of the joint solution space of T_i* A T_i = A, with the
/// constraint matrix assembled entry by entry from first principles.
inline Index oracle_toeplitz_dim(const OperatorTuple& t) {
  const Index n = t.n;
  CMatrix constraint = CMatrix::Zero(t.d() * n * n, n * n);
  for (Index i = 0; i < t.d(); ++i)
    for (Index p = 0; p < n; ++p)
      for (Index q = 0; q < n; ++q) {
        const Index row = (i * n + p) * n + q;
        for (Index r = 0; r < n; ++r)
          for (Index s = 0; s < n; ++s) {
            const Index col = r * n + s;  // row-major on purpose
            Complex coeff = std::conj(t.T[i](r, p)) * t.T[i](s, q);
            if (r == p && s == q) coeff -= 1.0;
            constraint(row, col) = coeff;
          }
      }
  Eigen::JacobiSVD<CMatrix> svd(constraint);
  const RVector sv = svd.singularValues();
  const double cut = 1e-8 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cut) ++rank;
  return n * n - rank;
}

/// Literal Cesaro mean (1/N) sum_{k=1..N} (P*)^k X P^k, one conjugation per
/// step. The mean of the first 2^j terms is snapshot so callers can watch
/// the linear convergence.
struct PhiOracle {
  CMatrix mean;                  // at the final term count
  std::vector<CMatrix> snapshots;  // means at N = 2^14, 2^15, ...
  long terms = 0;
};

inline PhiOracle oracle_phi(const CMatrix& p, const CMatrix& x,
                            long n_terms = 1L << 14) {
  PhiOracle out;
  CMatrix conjugated = x;
  CMatrix sum = CMatrix::Zero(p.rows(), p.cols());
  long next_snapshot = 1L << 14;
  for (long k = 1; k <= n_terms; ++k) {
    conjugated = p.adjoint() * conjugated * p;
    sum += conjugated;
    if (k == next_snapshot || k == n_terms) {
      out.snapshots.push_back(sum / static_cast<double>(k));
      if (k == next_snapshot) next_snapshot *= 2;
    }
  }
  out.mean = sum / static_cast<double>(n_terms);
  out.terms = n_terms;
  return out;
}

/// Literal Cesaro mean continued until two successive power-of-two
/// snapshots agree within self_tol. Returns false in `converged` when the
/// cap is reached first (slow rotations); the caller decides what that
/// means.
struct AdaptivePhiOracle {
  CMatrix mean;
  long terms = 0;
  bool converged = false;
  double self_residual = 0.0;
};

inline AdaptivePhiOracle oracle_phi_adaptive(const CMatrix& p, const CMatrix& x,
                                             double self_tol = 3e-6,
                                             long cap = 1L << 24) {
  AdaptivePhiOracle out;
  CMatrix conjugated = x;
  CMatrix sum = CMatrix::Zero(p.rows(), p.cols());
  CMatrix last_mean;
  long next_check = 1L << 12;
  for (long k = 1; k <= cap; ++k) {
    conjugated = p.adjoint() * conjugated * p;
    sum += conjugated;
    if (k == next_check) {
      CMatrix mean = sum / static_cast<double>(k);
      if (last_mean.size() > 0) {
        out.self_residual = op_norm(mean - last_mean);
        if (out.self_residual <= self_tol) {
          out.mean = std::move(mean);
          out.terms = k;
          out.converged = true;
          return out;
        }
      }
      last_mean = std::move(mean);
      next_check *= 2;
    }
  }
  out.mean = sum / static_cast<double>(cap);
  out.terms = cap;
  return out;
}

}  // namespace opext::oracles
