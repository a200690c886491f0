#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "opext/asymptotics.hpp"
#include "opext/linalg.hpp"
#include "opext/pseudoext.hpp"
#include "opext/rng.hpp"
#include "opext/toeplitz.hpp"
#include "opext/tuple.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// The completely positive idempotent projection onto T(P), realized by
// Cesaro means of the conjugation map X -> P* X P. The conjugation map is a
// contraction in both the operator and Hilbert-Schmidt norms, so its Cesaro
// means converge to the idempotent projection onto its fixed space, which is
// exactly T(P). Every property the construction is supposed to have
// (idempotence, PSD Choi matrix, range, unitality against Q) is certified by
// verify_phi rather than assumed.
// ---------------------------------------------------------------------------

struct CPProjection {
  Index n = 0;
  CMatrix L;  // n^2 x n^2, acts on vec coordinates
  double cesaro_terms = 0;  // number of averaged powers (a power of two)
  double residual = 0.0;    // final idempotence defect ||L^2 - L||
};

inline CMatrix phi_apply(const CPProjection& phi, const CMatrix& x) {
  return unvec(phi.L * vec(x), phi.n, phi.n);
}

inline CPProjection phi_projection(const CMatrix& p, double tol = 1e-8,
                                   int max_doublings = 60) {
  if (p.rows() != p.cols()) throw validation_error("phi_projection: matrix not square");
  const double norm_p = op_norm(p);
  if (norm_p > 1.0 + 1e-8)
    throw validation_error("phi_projection: ||P|| exceeds 1");
  const Index n = p.rows();
  // Scale a sub-roundoff excess out so powers stay bounded.
  const CMatrix ph = (norm_p > 1.0) ? CMatrix(p / norm_p) : p;
  const CMatrix m = kron(ph.transpose(), ph.adjoint());

  // Stage 1: Cesaro means with doubled term counts. The means converge at
  // rate 1/N on the oscillatory spectrum while repeated squaring loses one
  // bit per doubling, so the iteration stops at a moderate residual and
  // never runs into the roundoff floor.
  CPProjection out;
  out.n = n;
  CMatrix partial_sum = m;  // sum of M^1 .. M^N
  CMatrix power = m;        // M^N
  double terms = 1.0;
  CMatrix best_mean = m;
  double best_residual = 1e300;
  double best_terms = 1.0;
  const double stage1_tol = std::max(tol, 2e-5);
  // Residuals fluctuate with the angle-doubling of unimodular spectrum, so
  // the horizon is fixed: the roundoff floor of repeated squaring stays
  // below stage1_tol for another couple of doublings past 42.
  const int k_max = std::min(max_doublings, 42);
  for (int k = 1; k <= k_max; ++k) {
    const CMatrix next_sum = partial_sum + power * partial_sum;
    power = power * power;
    const CMatrix mean_old = partial_sum / terms;
    const CMatrix mean_new = next_sum / (2.0 * terms);
    // Frobenius norm: an upper bound on the operator norm, so the stop is
    // conservative, and far cheaper at n^2 x n^2.
    const double residual = (mean_new - mean_old).norm();
    partial_sum = next_sum;
    terms *= 2.0;
    if (residual < best_residual) {
      best_residual = residual;
      best_mean = mean_new;
      best_terms = terms;
    }
    if (k >= 12 && residual <= stage1_tol) break;
  }
  if (best_residual > 1e-3)
    throw convergence_error(
        "phi_projection: Cesaro means did not stabilize (best residual " +
        std::to_string(best_residual) + ")");
  out.cesaro_terms = best_terms;

  // Stage 2: the mean is a polynomial in the conjugation map, so it shares
  // the exact invariant subspaces; its spectrum sits near 1 on the fixed
  // space and within O(residual) of 0 elsewhere. The idempotent-purification
  // iteration X -> 3X^2 - 2X^3 therefore converges quadratically to the
  // exact projection onto the fixed space, restoring the accuracy the
  // truncated averaging cannot reach in double precision.
  CMatrix x = best_mean;
  double defect = (x * x - x).norm();
  for (int iter = 0; iter < 60 && defect > std::min(tol, 1e-10); ++iter) {
    const CMatrix x2 = x * x;
    x = 3.0 * x2 - 2.0 * (x2 * x);
    const double next_defect = (x * x - x).norm();
    if (next_defect > 0.3 || !(next_defect < defect || next_defect < 1e-12))
      throw convergence_error(
          "phi_projection: idempotent purification stalled (defect " +
          std::to_string(next_defect) + ")");
    defect = next_defect;
  }
  out.L = std::move(x);
  out.residual = defect;
  return out;
}

/// Choi matrix  sum_ij E_ij (x) Phi(E_ij), assembled from the columns of L.
inline CMatrix choi_matrix(const CPProjection& phi) {
  const Index n = phi.n;
  CMatrix choi(n * n, n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      choi.block(i * n, j * n, n, n) = unvec(phi.L.col(i + j * n), n, n);
  return choi;
}

// ---------------------------------------------------------------------------
// Finite-dimensional C*-algebras of matrices: a *-closed, unital,
// multiplicatively closed subspace, held as an orthonormal basis in vec
// coordinates.
// ---------------------------------------------------------------------------

struct CStarAlgebra {
  Index n = 0;
  SubspaceBasis basis;  // over C^{n^2}; span contains vec(I)

  Index dim() const { return basis.dim(); }
  CMatrix element(Index i) const { return unvec(basis.vectors.col(i), n, n); }
};

namespace detail {

inline SubspaceBasis orthonormalize_columns(const CMatrix& raw, double rel_tol) {
  SubspaceBasis out;
  out.ambient_dim = raw.rows();
  if (raw.cols() == 0) {
    out.vectors = CMatrix(raw.rows(), 0);
    return out;
  }
  CMatrix cols = raw;
  for (Index i = 0; i < cols.cols(); ++i) {
    const double nn = cols.col(i).norm();
    if (nn > 0) cols.col(i) /= nn;
  }
  return range_basis(cols, rel_tol);
}

}  // namespace detail

/// Closes span{I, seed} under pairwise products and adjoints until the
/// dimension stabilizes. A failure to stabilize signals a tolerance
/// breakdown, not a property of the input.
inline CStarAlgebra generate_cstar(const OperatorSubspace& seed_space,
                                   double tol = 1e-7, Index max_dim = -1) {
  const Index n = seed_space.n;
  if (max_dim < 0) max_dim = n * n;
  CStarAlgebra alg;
  alg.n = n;
  CMatrix raw(n * n, 1 + seed_space.dim());
  raw.col(0) = vec(CMatrix::Identity(n, n));
  for (Index i = 0; i < seed_space.dim(); ++i)
    raw.col(1 + i) = seed_space.basis.vectors.col(i);
  alg.basis = detail::orthonormalize_columns(raw, tol);

  for (int round = 0; round < 64; ++round) {
    const Index d = alg.dim();
    if (d > max_dim)
      throw convergence_error("generate_cstar: closure exceeded the dimension cap");
    CMatrix cand(n * n, d + d + d * d);
    Index col = 0;
    for (Index i = 0; i < d; ++i) cand.col(col++) = alg.basis.vectors.col(i);
    for (Index i = 0; i < d; ++i)
      cand.col(col++) = vec(alg.element(i).adjoint());
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        cand.col(col++) = vec(CMatrix(alg.element(i) * alg.element(j)));
    SubspaceBasis closed = detail::orthonormalize_columns(cand, tol);
    const bool stable = closed.dim() == d;
    alg.basis = std::move(closed);
    if (stable) return alg;
  }
  throw convergence_error("generate_cstar: closure did not stabilize");
}

/// Structural checks on a computed algebra: unit membership, *-closure,
/// closure of basis products.
inline ValidationReport verify_cstar(const CStarAlgebra& alg, double tol = 1e-8) {
  ValidationReport rep;
  const Index n = alg.n;
  rep.add("unit-membership", "unital-algebra",
          span_membership_residual(alg.basis, vec(CMatrix::Identity(n, n))),
          tol);
  double star = 0.0, prod = 0.0;
  for (Index i = 0; i < alg.dim(); ++i) {
    star = std::max(star, span_membership_residual(
                              alg.basis, vec(alg.element(i).adjoint())));
    for (Index j = 0; j < alg.dim(); ++j)
      prod = std::max(prod,
                      span_membership_residual(
                          alg.basis, vec(CMatrix(alg.element(i) * alg.element(j)))));
  }
  rep.add("star-closure", "star-algebra", star, tol);
  rep.add("product-closure", "algebra-closure", prod, tol);
  return rep;
}

/// Full certificate of the projection: idempotence, complete positivity via
/// the Choi matrix, unitality against the asymptotic limit, range equal to
/// T(P), sampled complete contractivity, the bimodule property over the
/// commutant of P, and the averaging identities
/// Phi(Phi(X) Y) = Phi(X Phi(Y)) = Phi(Phi(X) Phi(Y)).
inline ValidationReport verify_phi(const CPProjection& phi, const CMatrix& p,
                                   const OperatorTuple& t, const CMatrix& q,
                                   const RunConfig& config = {},
                                   const CStarAlgebra* alg = nullptr) {
  (void)t;
  ValidationReport rep;
  const Index n = phi.n;
  const double tol = std::max(config.tol, 1e-7);

  rep.add("idempotent", "cesaro-idempotent", op_norm(phi.L * phi.L - phi.L), tol);
  rep.add("unital-to-limit", "phi-of-identity",
          op_norm(phi_apply(phi, CMatrix::Identity(n, n)) - q), tol);
  rep.add("choi-psd", "complete-positivity",
          std::max(0.0, -min_hermitian_eigenvalue(choi_matrix(phi))), 1e-8);

  OperatorTuple p_tuple{n, {p}};
  OperatorSubspace toeplitz_p = toeplitz_basis(p_tuple, config.rank_tol);
  // The limit of the means is an idempotent HS-contraction, i.e. an
  // orthogonal (in particular Hermitian) projection: its eigenvalues sit at
  // 1 or at noise level, so an absolute 0.5 cutoff reads off the range even
  // when it is {0}.
  SubspaceBasis ran_phi;
  ran_phi.ambient_dim = n * n;
  {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(phi.L));
    Index first = 0;
    while (first < es.eigenvalues().size() && es.eigenvalues()(first) <= 0.5)
      ++first;
    ran_phi.vectors = es.eigenvectors().rightCols(es.eigenvalues().size() - first);
  }
  rep.add("range-is-toeplitz-space", "phi-range",
          subspace_distance(ran_phi, toeplitz_p.basis), 1e-6);

  Rng rng(config.seed);
  Rng sampler = rng.fork("phi-verify");
  double cc = 0.0;
  for (int level = 1; level <= config.levels; ++level) {
    CMatrix block_x = CMatrix::Zero(level * n, level * n);
    CMatrix block_phi = CMatrix::Zero(level * n, level * n);
    for (Index a = 0; a < level; ++a)
      for (Index b = 0; b < level; ++b) {
        const CMatrix x = sampler.gaussian_matrix(n, n);
        block_x.block(a * n, b * n, n, n) = x;
        block_phi.block(a * n, b * n, n, n) = phi_apply(phi, x);
      }
    cc = std::max(cc, op_norm(block_phi) - op_norm(block_x));
  }
  rep.add("completely-contractive-sampled", "complete-contraction",
          std::max(0.0, cc), tol);

  OperatorSubspace commutant_p = commutant_basis(std::vector<CMatrix>{p}, config.rank_tol);
  auto random_in = [&](const OperatorSubspace& space) {
    CMatrix x = CMatrix::Zero(n, n);
    for (Index i = 0; i < space.dim(); ++i)
      x += sampler.cgaussian() * space.element(i);
    const double nn = op_norm(x);
    return (nn > 1e-14) ? CMatrix(x / nn) : CMatrix::Identity(n, n);
  };
  double module_res = 0.0;
  for (int s = 0; s < std::max(10, config.samples / 2); ++s) {
    const CMatrix a = random_in(commutant_p);
    const CMatrix b = random_in(commutant_p);
    const CMatrix x = sampler.gaussian_matrix(n, n);
    module_res = std::max(module_res,
                          op_norm(phi_apply(phi, a * x * b) -
                                  a * phi_apply(phi, x) * b) /
                              std::max(1.0, op_norm(x)));
  }
  rep.add("bimodule-over-commutant", "phi-module-property", module_res, tol);

  CStarAlgebra local_alg;
  if (!alg) {
    local_alg = generate_cstar(toeplitz_p, std::max(config.tol, 1e-7));
    alg = &local_alg;
  }
  OperatorSubspace alg_space{n, alg->basis, SpaceKind::toeplitz};
  double averaging = 0.0;
  for (int s = 0; s < config.samples; ++s) {
    const CMatrix x = random_in(alg_space);
    const CMatrix y = random_in(alg_space);
    const CMatrix phix = phi_apply(phi, x);
    const CMatrix phiy = phi_apply(phi, y);
    const CMatrix lhs = phi_apply(phi, phix * y);
    const CMatrix mid = phi_apply(phi, x * phiy);
    const CMatrix rhs = phi_apply(phi, phix * phiy);
    averaging = std::max({averaging, op_norm(lhs - mid), op_norm(mid - rhs)});
  }
  rep.add("averaging-identities", "conditional-expectation", averaging, tol);
  return rep;
}

// ---------------------------------------------------------------------------
// Minimal Stinespring triple (K, pi, J) of Phi restricted to the algebra:
// the GNS-style sesquilinear form <a (x) h, b (x) g> = <Phi(b*a) h, g> on
// alg (x) C^n is assembled as a Gram matrix, the quotient by its kernel is
// taken with an eigendecomposition, pi acts by left multiplication pushed to
// the quotient, and J h is the class of I (x) h. Minimality holds by
// construction and is still checked.
// ---------------------------------------------------------------------------

struct StinespringTriple {
  Index k = 0;                         // dilation dimension
  std::vector<CMatrix> pi_basis_images;  // k x k, aligned with the algebra basis
  CMatrix J;                           // k x n
};

/// pi extended linearly to any matrix in the algebra's span. Returns the
/// image and the out-of-span residual of the input.
inline std::pair<CMatrix, double> pi_of(const StinespringTriple& triple,
                                        const CStarAlgebra& alg,
                                        const CMatrix& x) {
  auto [coords, res] = span_coordinates(alg.basis, vec(x));
  CMatrix img = CMatrix::Zero(triple.k, triple.k);
  for (Index i = 0; i < alg.dim(); ++i)
    img += coords(i) * triple.pi_basis_images[i];
  return {std::move(img), res};
}

inline StinespringTriple stinespring(const CStarAlgebra& alg,
                                     const CPProjection& phi,
                                     double tol = 1e-8,
                                     double gram_cutoff = 1e-6) {
  const Index n = alg.n;
  const Index dd = alg.dim();
  const Index big = dd * n;

  std::vector<CMatrix> elems(dd);
  for (Index i = 0; i < dd; ++i) elems[i] = alg.element(i);

  // Gram of the form; index (i, h) -> i*n + h.
  CMatrix gram(big, big);
  for (Index i = 0; i < dd; ++i)
    for (Index j = 0; j < dd; ++j) {
      const CMatrix block = phi_apply(phi, elems[i].adjoint() * elems[j]);
      gram.block(i * n, j * n, n, n) = block;
    }
  gram = hermitize(gram);

  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
  const RVector lam = es.eigenvalues();
  const double lam_max = std::max(lam.maxCoeff(), 0.0);
  if (lam.minCoeff() < -tol * std::max(1.0, lam_max))
    throw inconsistency_error("stinespring: Gram matrix is not PSD (min eigenvalue " +
                              std::to_string(lam.minCoeff()) + ")");
  std::vector<Index> kept;
  for (Index i = lam.size() - 1; i >= 0; --i)
    if (lam(i) > gram_cutoff * lam_max) kept.push_back(i);
  const Index k = static_cast<Index>(kept.size());

  CMatrix vk(big, k);
  RVector sqrt_lam(k);
  for (Index i = 0; i < k; ++i) {
    vk.col(i) = es.eigenvectors().col(kept[i]);
    sqrt_lam(i) = std::sqrt(lam(kept[i]));
  }
  const CMatrix quot = sqrt_lam.asDiagonal() * vk.adjoint();          // k x big
  const CMatrix quot_pinv = vk * sqrt_lam.cwiseInverse().asDiagonal();  // big x k

  StinespringTriple triple;
  triple.k = k;

  // J h = class of I (x) h.
  const CVector unit_coords = alg.basis.vectors.adjoint() * vec(CMatrix::Identity(n, n));
  triple.J = CMatrix::Zero(k, n);
  for (Index h = 0; h < n; ++h)
    for (Index i = 0; i < dd; ++i)
      triple.J.col(h) += unit_coords(i) * quot.col(i * n + h);

  // Left multiplication pushed to the quotient.
  for (Index l = 0; l < dd; ++l) {
    CMatrix mult = CMatrix::Zero(big, big);
    for (Index i = 0; i < dd; ++i) {
      auto [coords, res] = span_coordinates(alg.basis, vec(CMatrix(elems[l] * elems[i])));
      if (res > std::max(tol, 1e-7))
        throw inconsistency_error(
            "stinespring: algebra is not multiplicatively closed (residual " +
            std::to_string(res) + ")");
      for (Index j = 0; j < dd; ++j)
        if (std::abs(coords(j)) > 0)
          for (Index h = 0; h < n; ++h) mult(j * n + h, i * n + h) = coords(j);
    }
    triple.pi_basis_images.push_back(quot * mult * quot_pinv);
  }

  // Minimality: pi(alg) J C^n must exhaust the dilation space.
  if (k > 0) {
    CMatrix span(k, dd * n);
    for (Index l = 0; l < dd; ++l)
      span.middleCols(l * n, n) = triple.pi_basis_images[l] * triple.J;
    if (numerical_rank(span, 1e-9) != k)
      throw inconsistency_error("stinespring: dilation is not minimal");
  }
  return triple;
}

/// Contract of a computed triple: unital, *-preserving and multiplicative
/// representation satisfying the dilation identity Phi(a) = J* pi(a) J.
inline ValidationReport verify_stinespring(const StinespringTriple& triple,
                                           const CStarAlgebra& alg,
                                           const CPProjection& phi,
                                           double tol = 1e-7) {
  ValidationReport rep;
  const Index k = triple.k;
  auto [pi_unit, unit_res] = pi_of(triple, alg, CMatrix::Identity(alg.n, alg.n));
  rep.add("unit-in-span", "stinespring-representation", unit_res, tol);
  rep.add("unital", "stinespring-representation",
          k ? op_norm(pi_unit - CMatrix::Identity(k, k)) : 0.0, tol);
  double star = 0.0, mult = 0.0, dilation = 0.0;
  for (Index i = 0; i < alg.dim(); ++i) {
    const CMatrix ai = alg.element(i);
    auto [pi_star, star_res] = pi_of(triple, alg, ai.adjoint());
    star = std::max({star, star_res,
                     op_norm(pi_star - triple.pi_basis_images[i].adjoint())});
    dilation = std::max(dilation,
                        op_norm(phi_apply(phi, ai) -
                                triple.J.adjoint() * triple.pi_basis_images[i] * triple.J));
    for (Index j = 0; j < alg.dim(); ++j) {
      auto [pi_prod, prod_res] = pi_of(triple, alg, CMatrix(ai * alg.element(j)));
      mult = std::max({mult, prod_res,
                       op_norm(pi_prod - triple.pi_basis_images[i] *
                                             triple.pi_basis_images[j])});
    }
  }
  rep.add("star-preserving", "stinespring-representation", star, tol);
  rep.add("multiplicative", "stinespring-representation", mult, tol);
  rep.add("dilation-identity", "stinespring-identity", dilation, tol);
  return rep;
}

// ---------------------------------------------------------------------------
// Second construction of the canonical extension: U_i = pi(Q T_i) on the
// minimal dilation space of Phi restricted to the algebra generated by I and
// T(P).
// ---------------------------------------------------------------------------

struct StinespringBundle {
  PseudoExtension ext;
  StinespringTriple triple;
  CStarAlgebra alg;        // generated by I and T(P)
  CPProjection phi;
  OperatorSubspace toeplitz_p;  // T(P)
  CMatrix Q;
};

inline StinespringBundle canonical_extension_stinespring(
    const OperatorTuple& t, const AsymptoticLimit& limit,
    const RunConfig& config = {}) {
  if (limit.pure || op_norm(limit.Q) <= config.purity_tol)
    throw unsupported_error(
        "canonical_extension_stinespring: the adjoint of the product "
        "contraction is pure; no nonzero unitary pseudo-extension exists");
  StinespringBundle out;
  out.Q = limit.Q;
  const CMatrix p = product_contraction(t);
  out.phi = phi_projection(p, std::min(config.tol, 1e-8), config.max_doublings);
  OperatorTuple p_tuple{t.n, {p}};
  out.toeplitz_p = toeplitz_basis(p_tuple, config.rank_tol);
  out.alg = generate_cstar(out.toeplitz_p, std::max(config.tol, 1e-7));
  out.triple = stinespring(out.alg, out.phi, config.tol, config.gram_cutoff);

  out.ext.J = out.triple.J;
  out.ext.canonical = true;
  out.ext.route = Route::stinespring;
  const Index k = out.triple.k;
  for (Index i = 0; i < t.d(); ++i) {
    auto [ui, res] = pi_of(out.triple, out.alg, CMatrix(out.Q * t.T[i]));
    if (res > std::max(config.tol, 1e-7))
      throw inconsistency_error(
          "canonical_extension_stinespring: Q T_i left the algebra span (residual " +
          std::to_string(res) + ")");
    const double defect = op_norm(ui.adjoint() * ui - CMatrix::Identity(k, k));
    if (defect > 100 * config.tol)
      throw inconsistency_error(
          "canonical_extension_stinespring: pi(Q T_i) has unitarity defect " +
          std::to_string(defect));
    if (config.snap_unitary) ui = nearest_unitary(ui);
    out.ext.U.push_back(std::move(ui));
  }

  // The factors must multiply to pi(Q P), and the embedding must be
  // canonical: J*J = Phi(I) = Q.
  auto [u_of_p, res_p] = pi_of(out.triple, out.alg, CMatrix(out.Q * p));
  CMatrix u_prod = CMatrix::Identity(k, k);
  for (const auto& u : out.ext.U) u_prod = u_prod * u;
  const double prod_res = std::max(res_p, op_norm(u_prod - u_of_p));
  if (prod_res > 100 * config.tol)
    throw inconsistency_error(
        "canonical_extension_stinespring: product factorization residual " +
        std::to_string(prod_res));
  const double gram_res = op_norm(out.ext.J.adjoint() * out.ext.J - out.Q);
  if (gram_res > 100 * config.tol)
    throw inconsistency_error(
        "canonical_extension_stinespring: embedding Gram residual " +
        std::to_string(gram_res));
  return out;
}

// ---------------------------------------------------------------------------
// Verification of the structure maps Gamma, pi, Theta
// ---------------------------------------------------------------------------

/// Gamma(Y) = J* Y J compresses the commutant of the extension onto the
/// Toeplitz space of the tuple, bijectively and (sampled) completely
/// isometrically.
inline ValidationReport gamma_compression(const PseudoExtension& ext,
                                          const OperatorSubspace& commutant_u,
                                          const OperatorTuple& t,
                                          const RunConfig& config = {}) {
  ValidationReport rep;
  const CMatrix j = ext.J;
  const Index du = commutant_u.dim();
  OperatorSubspace toeplitz_t = toeplitz_basis(t, config.rank_tol);

  double membership = 0.0;
  CMatrix gamma_mat(t.n * t.n, du);
  for (Index i = 0; i < du; ++i) {
    const CMatrix y = commutant_u.element(i);
    const CMatrix gy = j.adjoint() * y * j;
    membership = std::max(membership, is_toeplitz(gy, t, config.tol).second);
    gamma_mat.col(i) = vec(gy);
  }
  rep.add("maps-into-toeplitz", "gamma-compression", membership, config.tol);
  rep.add_floor("dimension-match", "gamma-bijection",
                du == toeplitz_t.dim() ? 1.0 : 0.0, 0.5);
  rep.add_floor("injective", "gamma-bijection",
                (du == 0 || numerical_rank(gamma_mat, 1e-9) == du) ? 1.0 : 0.0,
                0.5);

  Rng rng(config.seed);
  Rng sampler = rng.fork("gamma-matricial");
  double iso = 0.0;
  for (int level = 1; level <= config.levels; ++level) {
    for (int s = 0; s < config.samples; ++s) {
      CMatrix block_u = CMatrix::Zero(level * ext.m(), level * ext.m());
      CMatrix block_t = CMatrix::Zero(level * t.n, level * t.n);
      for (Index a = 0; a < level; ++a)
        for (Index b = 0; b < level; ++b) {
          CMatrix y = CMatrix::Zero(ext.m(), ext.m());
          for (Index i = 0; i < du; ++i) y += sampler.cgaussian() * commutant_u.element(i);
          block_u.block(a * ext.m(), b * ext.m(), ext.m(), ext.m()) = y;
          block_t.block(a * t.n, b * t.n, t.n, t.n) = j.adjoint() * y * j;
        }
      const double scale = op_norm(block_u);
      if (scale < 1e-14) continue;
      iso = std::max(iso, std::abs(op_norm(block_t) - scale) / scale);
    }
  }
  rep.add("matricial-isometry-sampled", "gamma-complete-isometry", iso, config.tol);
  return rep;
}

/// pi restricted to the algebra generated by I and T(T) maps onto the
/// commutant of the extension tuple, is a section of Gamma, and factors
/// through Phi.
inline ValidationReport pi_representation(const StinespringTriple& triple,
                                          const CStarAlgebra& alg,
                                          const CPProjection& phi,
                                          const OperatorSubspace& toeplitz_t,
                                          const PseudoExtension& ext,
                                          const RunConfig& config = {}) {
  ValidationReport rep;
  const double tol = std::max(config.tol, 1e-7);
  OperatorSubspace commutant_u = commutant_basis(ext.U, config.rank_tol);

  double section = 0.0;
  for (Index i = 0; i < commutant_u.dim(); ++i) {
    const CMatrix y = commutant_u.element(i);
    auto [pi_gy, res] = pi_of(triple, alg, CMatrix(ext.J.adjoint() * y * ext.J));
    section = std::max({section, res, op_norm(pi_gy - y)});
  }
  rep.add("section-of-gamma", "pi-section", section, tol);

  CStarAlgebra sub = generate_cstar(toeplitz_t, std::max(config.tol, 1e-7));
  CMatrix image(triple.k * triple.k, sub.dim());
  double commute = 0.0, sub_membership = 0.0;
  for (Index i = 0; i < sub.dim(); ++i) {
    auto [pi_b, res] = pi_of(triple, alg, sub.element(i));
    sub_membership = std::max(sub_membership, res);
    image.col(i) = vec(pi_b);
    for (const auto& u : ext.U)
      commute = std::max(commute, op_norm(pi_b * u - u * pi_b));
  }
  rep.add("subalgebra-in-span", "algebra-inclusion", sub_membership, tol);
  rep.add_floor("image-dimension", "pi-surjectivity",
                numerical_rank(image, 1e-9) == commutant_u.dim() ? 1.0 : 0.0, 0.5);
  rep.add("image-commutes", "pi-into-commutant", commute, tol);

  double factors = 0.0;
  for (Index i = 0; i < alg.dim(); ++i) {
    const CMatrix a = alg.element(i);
    auto [pi_a, res_a] = pi_of(triple, alg, a);
    auto [pi_phi_a, res_b] = pi_of(triple, alg, phi_apply(phi, a));
    factors = std::max({factors, res_a, res_b, op_norm(pi_a - pi_phi_a)});
  }
  rep.add("factors-through-phi", "pi-kernel", factors, tol);
  return rep;
}

/// Theta(X) = pi(Q X) extends the commutant of the tuple into the commutant
/// of the extension, unitally, multiplicatively and completely
/// contractively; it agrees with the least-squares commutant extension up to
/// the uniqueness intertwiner when one is supplied.
inline ValidationReport theta_homomorphism(const StinespringTriple& triple,
                                           const CStarAlgebra& alg,
                                           const OperatorTuple& t,
                                           const PseudoExtension& ext,
                                           const CMatrix& q,
                                           const RunConfig& config = {},
                                           const PseudoExtension* douglas = nullptr,
                                           const CMatrix* equivalence_w = nullptr) {
  ValidationReport rep;
  const double tol = std::max(config.tol, 1e-7);
  const Index k = triple.k;
  OperatorSubspace commutant_t = commutant_basis(t, config.rank_tol);

  auto theta = [&](const CMatrix& x) { return pi_of(triple, alg, CMatrix(q * x)); };

  Rng rng(config.seed);
  Rng sampler = rng.fork("theta");
  auto random_commutant = [&]() {
    CMatrix x = CMatrix::Zero(t.n, t.n);
    for (Index i = 0; i < commutant_t.dim(); ++i)
      x += sampler.cgaussian() * commutant_t.element(i);
    const double nn = op_norm(x);
    return (nn > 1e-14) ? CMatrix(x / nn) : CMatrix::Identity(t.n, t.n);
  };

  // Q X stays inside the algebra span and lands in the Toeplitz space.
  double membership = 0.0, toeplitz_res = 0.0, commute = 0.0, embed = 0.0;
  for (Index i = 0; i < commutant_t.dim(); ++i) {
    const CMatrix x = commutant_t.element(i);
    auto [th, res] = theta(x);
    membership = std::max(membership, res);
    toeplitz_res = std::max(toeplitz_res, is_toeplitz(q * x, t, tol).second);
    embed = std::max(embed, op_norm(th * ext.J - ext.J * x));
    for (const auto& u : ext.U)
      commute = std::max(commute, op_norm(th * u - u * th));
  }
  rep.add("qx-in-algebra", "commutant-toeplitz-product", membership, tol);
  rep.add("qx-is-toeplitz", "commutant-toeplitz-product", toeplitz_res, tol);
  rep.add("image-commutes", "theta-into-commutant", commute, tol);
  rep.add("embedding-intertwining", "theta-extension", embed, tol);

  auto [th_unit, unit_res] = theta(CMatrix::Identity(t.n, t.n));
  rep.add("unital", "theta-unital",
          std::max(unit_res, k ? op_norm(th_unit - CMatrix::Identity(k, k)) : 0.0),
          tol);

  double mult = 0.0, contract = 0.0;
  for (int s = 0; s < config.samples; ++s) {
    const CMatrix x = random_commutant();
    const CMatrix y = random_commutant();
    auto [th_x, rx] = theta(x);
    auto [th_y, ry] = theta(y);
    auto [th_xy, rxy] = theta(CMatrix(x * y));
    mult = std::max({mult, rx, ry, rxy, op_norm(th_xy - th_x * th_y)});
    contract = std::max(contract, op_norm(th_x) - op_norm(x));
  }
  rep.add("multiplicative", "theta-multiplicative", mult, tol);

  for (int level = 2; level <= config.levels; ++level) {
    CMatrix block_x = CMatrix::Zero(level * t.n, level * t.n);
    CMatrix block_th = CMatrix::Zero(level * k, level * k);
    double worst_res = 0.0;
    for (Index a = 0; a < level; ++a)
      for (Index b = 0; b < level; ++b) {
        const CMatrix x = random_commutant();
        auto [th, res] = theta(x);
        worst_res = std::max(worst_res, res);
        block_x.block(a * t.n, b * t.n, t.n, t.n) = x;
        block_th.block(a * k, b * k, k, k) = th;
      }
    contract = std::max(contract, op_norm(block_th) - op_norm(block_x) + worst_res);
  }
  rep.add("completely-contractive-sampled", "theta-complete-contraction",
          std::max(0.0, contract), tol);

  if (douglas && equivalence_w) {
    double agree = 0.0;
    for (int s = 0; s < std::min(config.samples, 8); ++s) {
      const CMatrix x = random_commutant();
      auto [th, res] = theta(x);
      const CMatrix yd = commutant_extension(t, *douglas, x, config.tol).Y;
      agree = std::max({agree, res,
                        op_norm(*equivalence_w * yd * equivalence_w->adjoint() - th)});
    }
    rep.add("route-consistency", "canonical-uniqueness", agree, 10 * tol);
  }
  return rep;
}

}  // namespace opext
