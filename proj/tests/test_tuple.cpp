#include <catch2/catch.hpp>

#include "opext/json_io.hpp"
#include "opext/tuple.hpp"

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

}  // namespace

TEST_CASE("validate accepts commuting contractions") {
  REQUIRE(validate(diag_pair(), 1e-10).passed());

  OperatorTuple shift_and_id;
  shift_and_id.n = 2;
  CMatrix n(2, 2);
  n << 0, 1, 0, 0;
  shift_and_id.T = {n, CMatrix::Identity(2, 2)};
  REQUIRE(validate(shift_and_id, 1e-10).passed());
}

TEST_CASE("validate reports a contractivity failure with the right residual") {
  OperatorTuple bad;
  bad.n = 2;
  bad.T = {2.0 * CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)};
  ValidationReport rep = validate(bad, 1e-10);
  REQUIRE_FALSE(rep.passed());
  const CheckRecord* rec = rep.find("contraction[0]");
  REQUIRE(rec != nullptr);
  REQUIRE(rec->residual == Approx(1.0));
  REQUIRE(rep.find("contraction[1]")->pass);
  REQUIRE_THROWS_AS(require_valid(bad), validation_error);
}

TEST_CASE("validate reports commutativity failures") {
  OperatorTuple bad;
  bad.n = 2;
  CMatrix shift(2, 2), diag(2, 2);
  shift << 0, 1, 0, 0;
  diag << 1, 0, 0, 0.5;
  bad.T = {shift, diag};  // shift and diag(1, 1/2) do not commute
  ValidationReport rep = validate(bad, 1e-10);
  REQUIRE_FALSE(rep.passed());
  REQUIRE_FALSE(rep.find("commute[0,1]")->pass);
  REQUIRE(rep.find("commute[0,1]")->residual > 0.4);
}

TEST_CASE("product_contraction") {
  CMatrix expected(2, 2);
  expected << 1, 0, 0, 1.0 / 6.0;
  REQUIRE(op_norm(product_contraction(diag_pair()) - expected) < 1e-15);

  Rng rng(2);
  OperatorTuple unitaries = gen_commuting_normal(4, 3, 4, 99);
  const CMatrix p = product_contraction(unitaries);
  REQUIRE(op_norm(p.adjoint() * p - CMatrix::Identity(4, 4)) < 1e-12);

  OperatorTuple nil;
  nil.n = 2;
  CMatrix n(2, 2);
  n << 0, 1, 0, 0;
  nil.T = {n, n};
  REQUIRE(op_norm(product_contraction(nil)) == 0.0);
}

TEST_CASE("gen_commuting_normal respects the unimodular count") {
  for (Index u : {0, 1, 2, 4}) {
    OperatorTuple t = gen_commuting_normal(4, 2, u, 7 + u);
    REQUIRE(validate(t, 1e-8).passed());
    REQUIRE(op_norm(product_contraction(t)) <= 1.0 + 1e-8);
    const double rho = spectral_radius(product_contraction(t));
    if (u == 0)
      REQUIRE(rho <= std::pow(0.9, 2) + 1e-12);
    else
      REQUIRE(rho == Approx(1.0).margin(1e-12));
  }
  REQUIRE_THROWS_AS(gen_commuting_normal(3, 2, 4, 1), validation_error);
}

TEST_CASE("gen_poly_tuple is valid, strict and works for d = 1") {
  for (std::uint64_t seed : {1ULL, 9ULL, 42ULL}) {
    OperatorTuple t = gen_poly_tuple(5, 3, seed);
    REQUIRE(validate(t, 1e-10).passed());
    for (const auto& op : t.T) REQUIRE(op_norm(op) == Approx(0.95).margin(1e-10));
    REQUIRE(spectral_radius(product_contraction(t)) < 0.9);
  }
  OperatorTuple single = gen_poly_tuple(4, 1, 3);
  REQUIRE(single.d() == 1);
  REQUIRE(validate(single, 1e-10).passed());
}

TEST_CASE("generators are deterministic in the seed") {
  OperatorTuple a = gen_commuting_normal(6, 3, 2, 1234);
  OperatorTuple b = gen_commuting_normal(6, 3, 2, 1234);
  OperatorTuple c = gen_commuting_normal(6, 3, 2, 1235);
  for (Index j = 0; j < a.d(); ++j) {
    REQUIRE(a.T[j] == b.T[j]);  // bit-identical
    REQUIRE(op_norm(a.T[j] - c.T[j]) > 1e-3);
  }
  OperatorTuple p1 = gen_poly_tuple(4, 2, 77);
  OperatorTuple p2 = gen_poly_tuple(4, 2, 77);
  REQUIRE(p1.T[0] == p2.T[0]);
  REQUIRE(p1.T[1] == p2.T[1]);
}

TEST_CASE("gen_mixed_direct_sum stacks blocks") {
  OperatorTuple u = gen_commuting_normal(2, 2, 2, 5);
  OperatorTuple s = gen_poly_tuple(3, 2, 5);
  OperatorTuple mixed = gen_mixed_direct_sum(u, s);
  REQUIRE(mixed.n == 5);
  REQUIRE(validate(mixed, 1e-8).passed());
  REQUIRE(op_norm(mixed.T[0].topLeftCorner(2, 2) - u.T[0]) == 0.0);
  REQUIRE(op_norm(mixed.T[1].bottomRightCorner(3, 3) - s.T[1]) == 0.0);
  REQUIRE(op_norm(mixed.T[0].topRightCorner(2, 3)) == 0.0);

  OperatorTuple empty;
  REQUIRE(gen_mixed_direct_sum(u, empty).n == 2);
  REQUIRE(gen_mixed_direct_sum(empty, s).n == 3);

  OperatorTuple wrong = gen_poly_tuple(3, 3, 5);
  REQUIRE_THROWS_AS(gen_mixed_direct_sum(u, wrong), validation_error);
}

TEST_CASE("tuple JSON round trip and malformed documents") {
  OperatorTuple t = gen_commuting_normal(3, 2, 1, 11);
  Json j = tuple_to_json(t);
  OperatorTuple back = tuple_from_json(j);
  REQUIRE(back.n == t.n);
  REQUIRE(back.d() == t.d());
  for (Index i = 0; i < t.d(); ++i) REQUIRE(back.T[i] == t.T[i]);

  Json bad = j;
  bad["d"] = 5;
  REQUIRE_THROWS_AS(tuple_from_json(bad), validation_error);
  REQUIRE_THROWS_AS(tuple_from_json(Json::array()), validation_error);
  Json ragged = j;
  ragged["tuple"][0][0] = Json::array({1.0});
  REQUIRE_THROWS_AS(tuple_from_json(ragged), validation_error);
}
