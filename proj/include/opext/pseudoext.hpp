#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opext/asymptotics.hpp"
#include "opext/linalg.hpp"
#include "opext/toeplitz.hpp"
#include "opext/tuple.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// Unitary pseudo-extensions: a nonzero contraction J: C^n -> C^m and
// commuting unitaries U_j with U_j J = J T_j. The canonical one satisfies
// J*J = Q and is minimal; it is built here on Ran Q from one
// eigendecomposition of Q, so the embedding and its pseudo-inverse share an
// exact frame.
// ---------------------------------------------------------------------------

enum class Route { douglas, stinespring, user };

inline const char* route_name(Route r) {
  switch (r) {
    case Route::douglas: return "douglas";
    case Route::stinespring: return "stinespring";
    default: return "user";
  }
}

struct PseudoExtension {
  CMatrix J;               // m x n
  std::vector<CMatrix> U;  // d commuting unitaries on C^m
  bool canonical = false;
  Route route = Route::user;

  Index m() const { return J.rows(); }
  Index n() const { return J.cols(); }
  Index d() const { return static_cast<Index>(U.size()); }
};

// ---------------------------------------------------------------------------
// Word spans. The vectors w(U, U*) J h for monomial words w saturate the
// extension space; since the U_j commute, the distinct monomials are indexed
// by signed exponent vectors c in Z^d (negative entries meaning adjoint
// powers). Enumeration is by total degree, lexicographic within a degree, so
// two extensions of the same tuple walk the same word list.
// ---------------------------------------------------------------------------

namespace detail {

inline void signed_exponents_rec(Index d, int budget, std::vector<int>& cur,
                                 std::vector<std::vector<int>>& out) {
  if (static_cast<Index>(cur.size()) == d - 1) {
    for (int s : {+1, -1}) {
      if (budget == 0 && s < 0) break;  // emit 0 once
      cur.push_back(s * budget);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (int mag = budget; mag >= 0; --mag) {
    for (int s : {+1, -1}) {
      if (mag == 0 && s < 0) break;
      cur.push_back(s * mag);
      signed_exponents_rec(d, budget - mag, cur, out);
      cur.pop_back();
    }
  }
}

/// All c in Z^d with |c|_1 == level.
inline std::vector<std::vector<int>> signed_exponents(Index d, int level) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  signed_exponents_rec(d, level, cur, out);
  return out;
}

inline CMatrix apply_word(const std::vector<CMatrix>& u,
                          const std::vector<int>& c, const CMatrix& j) {
  CMatrix block = j;
  for (Index k = 0; k < static_cast<Index>(u.size()); ++k) {
    const int e = c[k];
    for (int p = 0; p < std::abs(e); ++p)
      block = (e > 0) ? CMatrix(u[k] * block) : CMatrix(u[k].adjoint() * block);
  }
  return block;
}

}  // namespace detail

/// Grows the word spans of one or two extensions level by level until the
/// ranks stop increasing. Both sides always receive the same word list.
struct WordSpanPair {
  CMatrix first;   // m1 x (N n)
  CMatrix second;  // m2 x (N n); empty when only one extension was given
  Index rank1 = 0;
  Index rank2 = 0;
  Index words = 0;
};

inline WordSpanPair saturate_word_spans(const PseudoExtension& e1,
                                        const PseudoExtension* e2 = nullptr,
                                        double rank_tol = 1e-9) {
  const Index cap = 4 * std::max<Index>(e1.m(), e2 ? e2->m() : 0) +
                    4 * e1.d() + 4;
  WordSpanPair out;
  std::vector<CMatrix> blocks1{e1.J};
  std::vector<CMatrix> blocks2;
  if (e2) blocks2.push_back(e2->J);
  auto stack = [](const std::vector<CMatrix>& blocks) {
    CMatrix v(blocks[0].rows(), static_cast<Index>(blocks.size()) * blocks[0].cols());
    for (Index i = 0; i < static_cast<Index>(blocks.size()); ++i)
      v.middleCols(i * blocks[0].cols(), blocks[0].cols()) = blocks[i];
    return v;
  };
  Index words = 1;
  Index rank1 = numerical_rank(blocks1[0], rank_tol);
  Index rank2 = e2 ? numerical_rank(blocks2[0], rank_tol) : 0;
  for (int level = 1;; ++level) {
    for (const auto& c : detail::signed_exponents(e1.d(), level)) {
      blocks1.push_back(detail::apply_word(e1.U, c, e1.J));
      if (e2) blocks2.push_back(detail::apply_word(e2->U, c, e2->J));
      ++words;
    }
    const Index new_rank1 = numerical_rank(stack(blocks1), rank_tol);
    const Index new_rank2 = e2 ? numerical_rank(stack(blocks2), rank_tol) : 0;
    const bool stable = new_rank1 == rank1 && new_rank2 == rank2;
    rank1 = new_rank1;
    rank2 = new_rank2;
    const bool full = rank1 == e1.m() && (!e2 || rank2 == e2->m());
    if (stable || full) break;
    if (words > cap)
      throw convergence_error("word span did not saturate within " +
                              std::to_string(cap) + " words");
  }
  out.first = stack(blocks1);
  if (e2) out.second = stack(blocks2);
  out.rank1 = rank1;
  out.rank2 = rank2;
  out.words = words;
  return out;
}

// ---------------------------------------------------------------------------
// Canonical construction on Ran Q
// ---------------------------------------------------------------------------

/// Canonical unitary pseudo-extension via the compression inequality and a
/// least-squares solve on Ran Q. With Q = V diag(lambda) V* and the kept
/// eigenpairs (lambda > rank_tol * lambda_max):
///   J   = diag(sqrt(lambda)) V*          (so J*J = Q up to the cutoff)
///   U_j = J T_j J^+ with J^+ = V diag(1/sqrt(lambda)).
/// Each U_j comes out unitary because the extension space is finite
/// dimensional; the defect is certified, not assumed. Pure input is refused:
/// a nonzero embedding cannot exist.
inline PseudoExtension canonical_extension_douglas(const OperatorTuple& t,
                                                   const AsymptoticLimit& limit,
                                                   const RunConfig& config = {}) {
  if (limit.pure || op_norm(limit.Q) <= config.purity_tol)
    throw unsupported_error(
        "canonical_extension_douglas: the adjoint of the product contraction "
        "is pure; no nonzero unitary pseudo-extension exists");

  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(limit.Q));
  const RVector lam = es.eigenvalues();
  const double lam_max = lam.maxCoeff();
  std::vector<Index> kept;
  for (Index i = lam.size() - 1; i >= 0; --i)  // descending
    if (lam(i) > config.rank_tol * lam_max) kept.push_back(i);
  const Index m = static_cast<Index>(kept.size());

  CMatrix vk(t.n, m);
  RVector sqrt_lam(m);
  for (Index i = 0; i < m; ++i) {
    vk.col(i) = es.eigenvectors().col(kept[i]);
    sqrt_lam(i) = std::sqrt(lam(kept[i]));
  }
  const CMatrix j = sqrt_lam.asDiagonal() * vk.adjoint();
  const CMatrix j_pinv = vk * sqrt_lam.cwiseInverse().asDiagonal();

  PseudoExtension ext;
  ext.J = j;
  ext.canonical = true;
  ext.route = Route::douglas;
  for (Index k = 0; k < t.d(); ++k) {
    CMatrix xk = j * t.T[k] * j_pinv;
    const double defect = op_norm(xk.adjoint() * xk - CMatrix::Identity(m, m));
    if (defect > config.tol)
      throw inconsistency_error(
          "canonical_extension_douglas: factor " + std::to_string(k) +
          " has unitarity defect " + std::to_string(defect));
    if (config.snap_unitary) xk = nearest_unitary(xk);
    ext.U.push_back(std::move(xk));
  }

  // The product of the factors must reproduce the isometry induced by P.
  const CMatrix x_from_p = j * product_contraction(t) * j_pinv;
  CMatrix x_prod = CMatrix::Identity(m, m);
  for (const auto& u : ext.U) x_prod = x_prod * u;
  const double prod_res = op_norm(x_prod - x_from_p);
  if (prod_res > 10 * config.tol)
    throw inconsistency_error(
        "canonical_extension_douglas: product factorization residual " +
        std::to_string(prod_res));
  return ext;
}

/// Full contract of a (claimed) pseudo-extension; canonical claims add the
/// Gram identity J*J = Q, minimality of the word span, and the Toeplitz
/// witness J*J.
inline ValidationReport verify_pseudo_extension(
    const OperatorTuple& t, const PseudoExtension& e, double tol = 1e-8,
    const AsymptoticLimit* limit = nullptr, const RunConfig& config = {}) {
  ValidationReport rep;
  if (e.d() != t.d()) throw validation_error("verify_pseudo_extension: tuple length mismatch");
  if (e.n() != t.n) throw validation_error("verify_pseudo_extension: ambient dimension mismatch");
  const Index m = e.m();
  rep.add_floor("embedding-nonzero", "pseudo-extension", op_norm(e.J), 1e-10);
  rep.add("embedding-contraction", "pseudo-extension",
          std::max(0.0, op_norm(e.J) - 1.0), tol);
  double unit = 0.0, comm = 0.0, intw = 0.0;
  for (Index i = 0; i < e.d(); ++i) {
    unit = std::max(unit,
                    op_norm(e.U[i].adjoint() * e.U[i] - CMatrix::Identity(m, m)));
    intw = std::max(intw, op_norm(e.U[i] * e.J - e.J * t.T[i]));
    for (Index k = i + 1; k < e.d(); ++k)
      comm = std::max(comm, op_norm(e.U[i] * e.U[k] - e.U[k] * e.U[i]));
  }
  rep.add("unitarity", "unitary-extension", unit, tol);
  rep.add("commutation", "commuting-tuple", comm, tol);
  rep.add("intertwining", "pseudo-extension-intertwining", intw, tol);

  CMatrix u_prod = CMatrix::Identity(m, m);
  for (const auto& u : e.U) u_prod = u_prod * u;
  rep.add("product-intertwining", "pseudo-extension-intertwining",
          op_norm(u_prod * e.J - e.J * product_contraction(t)),
          std::max(tol, 1e-7));

  const auto [tw_ok, tw_res] = is_toeplitz(e.J.adjoint() * e.J, t, tol);
  rep.add("toeplitz-witness", "brown-halmos", tw_res, tol);

  if (e.canonical) {
    AsymptoticLimit local;
    if (!limit) {
      local = asymptotic_limit(product_contraction(t), tol * 1e-2,
                               config.max_doublings, config.purity_tol);
      limit = &local;
    }
    rep.add("canonical-gram", "canonical-embedding",
            op_norm(e.J.adjoint() * e.J - limit->Q), tol);
    WordSpanPair span = saturate_word_spans(e, nullptr, config.rank_tol);
    rep.add_floor("minimality", "minimal-extension",
                  span.rank1 == m ? 1.0 : 0.0, 0.5);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Uniqueness: any two canonical extensions of one tuple are unitarily
// equivalent. The intertwiner is read off by matching the word-span frames;
// the Gram matrices of the two frames depend on the tuple alone, which is
// the correctness oracle checked before inverting anything.
// ---------------------------------------------------------------------------

struct EquivalenceResult {
  CMatrix W;  // m2 x m1 unitary with W U_j = U~_j W and W J = J~
  ValidationReport report;
};

inline EquivalenceResult equivalence_unitary(const PseudoExtension& e1,
                                             const PseudoExtension& e2,
                                             double tol = 1e-6,
                                             const RunConfig& config = {}) {
  if (e1.n() != e2.n() || e1.d() != e2.d())
    throw validation_error("equivalence_unitary: extensions are not comparable");
  WordSpanPair span = saturate_word_spans(e1, &e2, config.rank_tol);
  if (span.rank1 != e1.m() || span.rank2 != e2.m() || e1.m() != e2.m())
    throw inconsistency_error(
        "equivalence_unitary: span saturation dimensions differ (" +
        std::to_string(span.rank1) + " of " + std::to_string(e1.m()) + " vs " +
        std::to_string(span.rank2) + " of " + std::to_string(e2.m()) +
        "); input is not a pair of canonical extensions");
  const CMatrix g1 = span.first.adjoint() * span.first;
  const CMatrix g2 = span.second.adjoint() * span.second;
  const double gram_res = op_norm(g1 - g2) / std::max(1.0, op_norm(g1));
  if (gram_res > std::max(tol, 1e-7))
    throw inconsistency_error("equivalence_unitary: word-span Gram mismatch " +
                              std::to_string(gram_res) +
                              "; input is not a pair of canonical extensions");
  EquivalenceResult out;
  out.W = nearest_unitary(span.second * pinv(span.first));
  out.report.add("gram-match", "canonical-uniqueness", gram_res, std::max(tol, 1e-7));
  double intw = 0.0;
  for (Index j = 0; j < e1.d(); ++j)
    intw = std::max(intw, op_norm(out.W * e1.U[j] - e2.U[j] * out.W));
  out.report.add("unitary-intertwining", "canonical-uniqueness", intw, tol);
  out.report.add("embedding-match", "canonical-uniqueness",
                 op_norm(out.W * e1.J - e2.J), tol);
  return out;
}

// ---------------------------------------------------------------------------
// Every unitary pseudo-extension factors through the canonical one.
// ---------------------------------------------------------------------------

struct FactorResult {
  CMatrix factor;  // contraction from the canonical space into the other's
  ValidationReport report;
};

inline FactorResult factor_through_canonical(const OperatorTuple& t,
                                             const PseudoExtension& canon,
                                             const PseudoExtension& other,
                                             double tol = 1e-8,
                                             const AsymptoticLimit* limit = nullptr,
                                             const RunConfig& config = {}) {
  ValidationReport base = verify_pseudo_extension(t, other, std::max(tol, 1e-8));
  // Canonicity checks do not apply to `other`; the base contract must hold.
  for (const auto& c : base.checks)
    if (!c.pass)
      throw validation_error("factor_through_canonical: other extension fails '" +
                             c.name + "' (residual " + std::to_string(c.residual) + ")");
  AsymptoticLimit local;
  if (!limit) {
    local = asymptotic_limit(product_contraction(t), tol * 1e-2,
                             config.max_doublings, config.purity_tol);
    limit = &local;
  }
  FactorResult out;
  const CMatrix gram_gap = limit->Q - other.J.adjoint() * other.J;
  out.report.add("embedding-dominated", "canonical-domination",
                 std::max(0.0, -min_hermitian_eigenvalue(gram_gap)), tol);

  WordSpanPair span = saturate_word_spans(canon, &other, config.rank_tol);
  if (span.rank1 != canon.m())
    throw inconsistency_error(
        "factor_through_canonical: canonical word span is not minimal");
  out.factor = span.second * pinv(span.first);
  out.report.add("factor-contraction", "canonical-factoring",
                 std::max(0.0, op_norm(out.factor) - 1.0), tol);
  out.report.add("factor-embedding", "canonical-factoring",
                 op_norm(out.factor * canon.J - other.J), std::max(tol, 1e-7));
  double intw = 0.0;
  for (Index j = 0; j < t.d(); ++j)
    intw = std::max(intw, op_norm(out.factor * canon.U[j] - other.U[j] * out.factor));
  out.report.add("factor-intertwining", "canonical-factoring", intw,
                 std::max(tol, 1e-7));
  return out;
}

// ---------------------------------------------------------------------------
// Commutant and intertwiner pseudo-extensions. X in the commutant of the
// tuple induces Y on the extension space through the same least-squares
// scheme as the unitaries themselves; the norm never grows.
// ---------------------------------------------------------------------------

struct OperatorExtensionResult {
  CMatrix Y;
  ValidationReport report;
};

inline OperatorExtensionResult commutant_extension(const OperatorTuple& t,
                                                   const PseudoExtension& canon,
                                                   const CMatrix& x,
                                                   double tol = 1e-8) {
  double comm_res = 0.0;
  for (Index j = 0; j < t.d(); ++j)
    comm_res = std::max(comm_res, op_norm(t.T[j] * x - x * t.T[j]));
  if (comm_res > std::max(tol, 1e-8) * std::max(1.0, op_norm(x)))
    throw validation_error("commutant_extension: X is not in the commutant (residual " +
                           std::to_string(comm_res) + ")");
  OperatorExtensionResult out;
  const CMatrix j_pinv = pinv(canon.J);
  out.Y = canon.J * x * j_pinv;
  const double norm_x = op_norm(x);
  out.report.add("commutant-membership", "commutant", comm_res,
                 std::max(tol, 1e-8) * std::max(1.0, norm_x));
  out.report.add("norm-bound", "commutant-extension-bound",
                 std::max(0.0, op_norm(out.Y) - norm_x), tol);
  out.report.add("embedding-intertwining", "commutant-extension",
                 op_norm(out.Y * canon.J - canon.J * x), tol);
  double comm_u = 0.0;
  for (const auto& u : canon.U)
    comm_u = std::max(comm_u, op_norm(out.Y * u - u * out.Y));
  out.report.add("commutes-with-extension", "commutant-extension", comm_u, tol);
  out.report.note("observed norm gap " + std::to_string(norm_x - op_norm(out.Y)));
  if (norm_x <= tol) out.report.note("degenerate: X is (numerically) zero");
  return out;
}

inline OperatorExtensionResult intertwiner_extension(
    const OperatorTuple& ta, const PseudoExtension& canon_a,
    const OperatorTuple& tb, const PseudoExtension& canon_b, const CMatrix& x,
    double tol = 1e-8) {
  if (ta.d() != tb.d())
    throw validation_error("intertwiner_extension: tuple lengths differ");
  double intw_res = 0.0;
  for (Index j = 0; j < ta.d(); ++j)
    intw_res = std::max(intw_res, op_norm(x * ta.T[j] - tb.T[j] * x));
  if (intw_res > std::max(tol, 1e-8) * std::max(1.0, op_norm(x)))
    throw validation_error("intertwiner_extension: X does not intertwine the tuples");
  OperatorExtensionResult out;
  out.Y = canon_b.J * x * pinv(canon_a.J);
  const double norm_x = op_norm(x);
  out.report.add("intertwiner-membership", "intertwiner", intw_res,
                 std::max(tol, 1e-8) * std::max(1.0, norm_x));
  out.report.add("norm-bound", "commutant-extension-bound",
                 std::max(0.0, op_norm(out.Y) - norm_x), tol);
  out.report.add("embedding-intertwining", "intertwiner-extension",
                 op_norm(out.Y * canon_a.J - canon_b.J * x), tol);
  double intw_u = 0.0;
  for (Index j = 0; j < ta.d(); ++j)
    intw_u = std::max(intw_u, op_norm(out.Y * canon_a.U[j] - canon_b.U[j] * out.Y));
  out.report.add("extension-intertwining", "intertwiner-extension", intw_u, tol);
  if (norm_x <= tol) out.report.note("degenerate: X is (numerically) zero");
  return out;
}

}  // namespace opext
