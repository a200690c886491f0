#include <catch2/catch.hpp>

#include "opext/pseudoext.hpp"

using namespace opext;

namespace {

OperatorTuple diag_pair() {
  OperatorTuple t;
  t.n = 2;
  CMatrix t1(2, 2), t2(2, 2);
  t1 << 1, 0, 0, 0.5;
  t2 << 1, 0, 0, 1.0 / 3.0;
  t.T = {t1, t2};
  return t;
}

OperatorTuple mixed_instance(std::uint64_t seed, Index nu = 2, Index np = 3,
                             Index d = 2) {
  return gen_mixed_direct_sum(gen_commuting_normal(nu, d, nu, seed),
                              gen_poly_tuple(np, d, seed + 1000));
}

PseudoExtension douglas_of(const OperatorTuple& t) {
  AsymptoticLimit limit = asymptotic_limit(product_contraction(t));
  return canonical_extension_douglas(t, limit);
}

}  // namespace

TEST_CASE("Douglas route on the diagonal pair gives a one-dimensional extension") {
  OperatorTuple t = diag_pair();
  PseudoExtension e = douglas_of(t);
  REQUIRE(e.m() == 1);
  // J maps onto the fixed coordinate; entries are determined up to a phase.
  REQUIRE(std::abs(std::abs(e.J(0, 0)) - 1.0) < 1e-10);
  REQUIRE(std::abs(e.J(0, 1)) < 1e-10);
  REQUIRE(std::abs(e.U[0](0, 0) - Complex(1)) < 1e-10);
  REQUIRE(std::abs(e.U[1](0, 0) - Complex(1)) < 1e-10);
  CMatrix q(2, 2);
  q << 1, 0, 0, 0;
  REQUIRE(op_norm(e.J.adjoint() * e.J - q) < 1e-10);
}

TEST_CASE("Douglas route on commuting unitaries conjugates the tuple") {
  OperatorTuple t = gen_commuting_normal(4, 3, 4, 51);
  PseudoExtension e = douglas_of(t);
  REQUIRE(e.m() == 4);
  REQUIRE(op_norm(e.J.adjoint() * e.J - CMatrix::Identity(4, 4)) < 1e-10);
  for (Index j = 0; j < t.d(); ++j)
    REQUIRE(op_norm(e.U[j] - e.J * t.T[j] * e.J.adjoint()) < 1e-8);
}

TEST_CASE("Douglas route on a mixed direct sum lives on the unitary block") {
  OperatorTuple t = mixed_instance(61);
  PseudoExtension e = douglas_of(t);
  REQUIRE(e.m() == 2);
  ValidationReport rep = verify_pseudo_extension(t, e);
  REQUIRE(rep.passed());
}

TEST_CASE("pure tuples are refused") {
  OperatorTuple t = gen_poly_tuple(4, 2, 71);
  AsymptoticLimit limit = asymptotic_limit(product_contraction(t));
  REQUIRE_THROWS_AS(canonical_extension_douglas(t, limit), unsupported_error);
}

TEST_CASE("verify_pseudo_extension catches broken claims") {
  OperatorTuple t = mixed_instance(81);
  PseudoExtension e = douglas_of(t);
  REQUIRE(verify_pseudo_extension(t, e).passed());

  SECTION("scaling the embedding only breaks canonicity") {
    PseudoExtension scaled = e;
    scaled.J *= 0.5;
    ValidationReport rep = verify_pseudo_extension(t, scaled);
    REQUIRE_FALSE(rep.passed());
    REQUIRE_FALSE(rep.find("canonical-gram")->pass);
    REQUIRE(rep.find("intertwining")->pass);
    REQUIRE(rep.find("unitarity")->pass);
    scaled.canonical = false;
    REQUIRE(verify_pseudo_extension(t, scaled).passed());
  }

  SECTION("replacing one unitary breaks intertwining") {
    PseudoExtension broken = e;
    broken.U[0] = CMatrix::Identity(e.m(), e.m());
    ValidationReport rep = verify_pseudo_extension(t, broken);
    REQUIRE_FALSE(rep.find("intertwining")->pass);
  }
}

TEST_CASE("the embedding witnesses the Brown-Halmos relations") {
  for (std::uint64_t seed : {91ULL, 92ULL}) {
    OperatorTuple t = mixed_instance(seed, 3, 2, 3);
    PseudoExtension e = douglas_of(t);
    const auto [ok, res] = is_toeplitz(e.J.adjoint() * e.J, t, 1e-8);
    REQUIRE(ok);
  }
}

TEST_CASE("the extension factors multiply to the product isometry") {
  OperatorTuple t = mixed_instance(95, 3, 3, 3);
  PseudoExtension e = douglas_of(t);
  CMatrix prod = CMatrix::Identity(e.m(), e.m());
  for (const auto& u : e.U) prod = prod * u;
  REQUIRE(op_norm(prod * e.J - e.J * product_contraction(t)) < 1e-8);
}

TEST_CASE("J is an isometry exactly when the tuple consists of isometries") {
  OperatorTuple unitary = gen_commuting_normal(3, 2, 3, 97);
  PseudoExtension eu = douglas_of(unitary);
  REQUIRE(op_norm(eu.J.adjoint() * eu.J - CMatrix::Identity(3, 3)) < 1e-8);

  OperatorTuple mixed = mixed_instance(98);
  PseudoExtension em = douglas_of(mixed);
  REQUIRE(op_norm(em.J.adjoint() * em.J - CMatrix::Identity(mixed.n, mixed.n)) > 0.5);
}

TEST_CASE("snap-unitary polishes the factors and keeps the contract") {
  OperatorTuple t = mixed_instance(99, 3, 3, 2);
  AsymptoticLimit limit = asymptotic_limit(product_contraction(t));
  RunConfig config;
  config.snap_unitary = true;
  PseudoExtension e = canonical_extension_douglas(t, limit, config);
  for (const auto& u : e.U)
    REQUIRE(op_norm(u.adjoint() * u - CMatrix::Identity(e.m(), e.m())) < 1e-13);
  REQUIRE(verify_pseudo_extension(t, e, 1e-8, &limit, config).passed());
}

TEST_CASE("equivalence_unitary recovers a known conjugation") {
  OperatorTuple t = mixed_instance(101, 3, 2);
  PseudoExtension e1 = douglas_of(t);

  SECTION("identity on equal extensions") {
    EquivalenceResult eq = equivalence_unitary(e1, e1);
    REQUIRE(eq.report.passed());
    REQUIRE(op_norm(eq.W - CMatrix::Identity(e1.m(), e1.m())) < 1e-8);
  }

  SECTION("conjugation by a fixed unitary is recovered") {
    Rng rng(7);
    const CMatrix v = rng.haar_unitary(e1.m());
    PseudoExtension e2 = e1;
    e2.J = v * e1.J;
    for (auto& u : e2.U) u = v * u * v.adjoint();
    EquivalenceResult eq = equivalence_unitary(e1, e2);
    REQUIRE(eq.report.passed());
    REQUIRE(op_norm(eq.W - v) < 1e-8);
  }

  SECTION("non-canonical input is rejected via the Gram oracle") {
    PseudoExtension e2 = e1;
    e2.J = 0.5 * e1.J;
    REQUIRE_THROWS_AS(equivalence_unitary(e1, e2), inconsistency_error);
  }

  SECTION("extensions of different tuples are detected as non-equivalent") {
    OperatorTuple other = mixed_instance(102, 3, 2);
    PseudoExtension e2 = douglas_of(other);
    REQUIRE_THROWS_AS(equivalence_unitary(e1, e2), inconsistency_error);
  }
}

TEST_CASE("every unitary pseudo-extension factors through the canonical one") {
  OperatorTuple t = mixed_instance(111, 2, 2, 3);
  AsymptoticLimit limit = asymptotic_limit(product_contraction(t));
  PseudoExtension canon = canonical_extension_douglas(t, limit);

  SECTION("factoring through itself is the identity") {
    FactorResult f = factor_through_canonical(t, canon, canon, 1e-8, &limit);
    REQUIRE(f.report.passed());
    REQUIRE(op_norm(f.factor - CMatrix::Identity(canon.m(), canon.m())) < 1e-7);
  }

  SECTION("a scaled embedding factors through a scaled identity") {
    PseudoExtension other = canon;
    other.J *= 0.7;
    other.canonical = false;
    FactorResult f = factor_through_canonical(t, canon, other, 1e-8, &limit);
    REQUIRE(f.report.passed());
    REQUIRE(op_norm(f.factor - 0.7 * CMatrix::Identity(canon.m(), canon.m())) < 1e-7);
  }

  SECTION("direct-sum inflation with a small second embedding") {
    const Index m = canon.m();
    PseudoExtension other;
    other.canonical = false;
    other.J = CMatrix(2 * m, t.n);
    other.J.topRows(m) = 0.8 * canon.J;
    other.J.bottomRows(m) = 0.5 * canon.J;
    for (const auto& u : canon.U) {
      CMatrix w = CMatrix::Zero(2 * m, 2 * m);
      w.topLeftCorner(m, m) = u;
      w.bottomRightCorner(m, m) = u;
      other.U.push_back(w);
    }
    FactorResult f = factor_through_canonical(t, canon, other, 1e-8, &limit);
    REQUIRE(f.report.passed());
    REQUIRE(op_norm(f.factor) <= 1.0 + 1e-8);
    REQUIRE(op_norm(f.factor * canon.J - other.J) < 1e-7);
  }

  SECTION("a zero-embedding summand breaks a canonicity claim upstream") {
    const Index m = canon.m();
    Rng rng(3);
    PseudoExtension padded;
    padded.J = CMatrix::Zero(m + 2, t.n);
    padded.J.topRows(m) = canon.J;
    const CMatrix g = rng.haar_unitary(2);
    for (const auto& u : canon.U) {
      CMatrix w = CMatrix::Zero(m + 2, m + 2);
      w.topLeftCorner(m, m) = u;
      w.bottomRightCorner(2, 2) = g;
      padded.U.push_back(w);
    }
    padded.canonical = true;  // false claim: the summand is unreachable
    ValidationReport rep = verify_pseudo_extension(t, padded);
    REQUIRE_FALSE(rep.find("minimality")->pass);
    padded.canonical = false;
    REQUIRE(verify_pseudo_extension(t, padded).passed());
    FactorResult f = factor_through_canonical(t, canon, padded, 1e-8, &limit);
    REQUIRE(f.report.passed());
  }
}

TEST_CASE("commutant extension") {
  OperatorTuple t = mixed_instance(121, 3, 2);
  AsymptoticLimit limit = asymptotic_limit(product_contraction(t));
  PseudoExtension canon = canonical_extension_douglas(t, limit);

  SECTION("identity extends to the identity") {
    OperatorExtensionResult r =
        commutant_extension(t, canon, CMatrix::Identity(t.n, t.n));
    REQUIRE(r.report.passed());
    REQUIRE(op_norm(r.Y - CMatrix::Identity(canon.m(), canon.m())) < 1e-8);
  }

  SECTION("the tuple entries extend to the extension unitaries") {
    for (Index k = 0; k < t.d(); ++k) {
      OperatorExtensionResult r = commutant_extension(t, canon, t.T[k]);
      REQUIRE(r.report.passed());
      REQUIRE(op_norm(r.Y - canon.U[k]) < 1e-8);
    }
  }

  SECTION("the product keeps the norm bound with slack") {
    const CMatrix p = product_contraction(t);
    OperatorExtensionResult r = commutant_extension(t, canon, p);
    REQUIRE(r.report.passed());
    REQUIRE(op_norm(r.Y) <= op_norm(p) + 1e-8);
  }

  SECTION("non-commuting input is rejected") {
    Rng rng(9);
    REQUIRE_THROWS_AS(commutant_extension(t, canon, rng.gaussian_matrix(t.n, t.n)),
                      validation_error);
  }
}

TEST_CASE("intertwiner extension") {
  OperatorTuple ta = mixed_instance(131, 2, 2);
  AsymptoticLimit la = asymptotic_limit(product_contraction(ta));
  PseudoExtension ca = canonical_extension_douglas(ta, la);

  SECTION("same tuple with the identity") {
    OperatorExtensionResult r =
        intertwiner_extension(ta, ca, ta, ca, CMatrix::Identity(ta.n, ta.n));
    REQUIRE(r.report.passed());
    REQUIRE(op_norm(r.Y - CMatrix::Identity(ca.m(), ca.m())) < 1e-8);
  }

  SECTION("a unitary conjugation induces a unitary between extension spaces") {
    Rng rng(17);
    const CMatrix v = rng.haar_unitary(ta.n);
    OperatorTuple tb;
    tb.n = ta.n;
    for (const auto& op : ta.T) tb.T.push_back(v * op * v.adjoint());
    AsymptoticLimit lb = asymptotic_limit(product_contraction(tb));
    PseudoExtension cb = canonical_extension_douglas(tb, lb);
    OperatorExtensionResult r = intertwiner_extension(ta, ca, tb, cb, v);
    REQUIRE(r.report.passed());
    REQUIRE(op_norm(r.Y.adjoint() * r.Y - CMatrix::Identity(ca.m(), ca.m())) < 1e-7);
  }

  SECTION("zero intertwiner is flagged as degenerate") {
    OperatorExtensionResult r =
        intertwiner_extension(ta, ca, ta, ca, CMatrix::Zero(ta.n, ta.n));
    REQUIRE(op_norm(r.Y) < 1e-12);
    bool flagged = false;
    for (const auto& note : r.report.notes)
      if (note.find("degenerate") != std::string::npos) flagged = true;
    REQUIRE(flagged);
  }
}
