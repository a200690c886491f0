#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "opext/asymptotics.hpp"
#include "opext/cpstine.hpp"
#include "opext/json_io.hpp"
#include "opext/pseudoext.hpp"
#include "opext/toeplitz.hpp"
#include "opext/tuple.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// Named generator specs ("normal:n=12,d=4,unimodular=4,seed=1"), the full
// per-instance verification pipeline, and the default batch roster. The CLI
// and the test suites all drive instances through this one path.
// ---------------------------------------------------------------------------

struct InstanceSpec {
  std::string kind;  // normal | poly | mixed
  Index n = 4;
  Index d = 2;
  Index unimodular = -1;  // normal: count of unimodular coordinates
  Index nu = -1;          // mixed: dimension of the unitary block
  std::uint64_t seed = 1;

  std::string name() const {
    std::string s = kind + ":n=" + std::to_string(n) + ",d=" + std::to_string(d);
    if (kind == "normal")
      s += ",unimodular=" + std::to_string(unimodular < 0 ? (n + 1) / 2 : unimodular);
    if (kind == "mixed") s += ",nu=" + std::to_string(nu < 0 ? (n + 1) / 2 : nu);
    s += ",seed=" + std::to_string(seed);
    return s;
  }
};

inline InstanceSpec parse_generate_spec(const std::string& text) {
  InstanceSpec spec;
  const auto colon = text.find(':');
  spec.kind = text.substr(0, colon);
  if (spec.kind != "normal" && spec.kind != "poly" && spec.kind != "mixed")
    throw validation_error("unknown instance kind '" + spec.kind +
                           "' (expected normal, poly or mixed)");
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item = rest.substr(0, comma);
    rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw validation_error("malformed generator parameter '" + item + "'");
    const std::string key = item.substr(0, eq);
    long long value = 0;
    try {
      value = std::stoll(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw validation_error("malformed generator value in '" + item + "'");
    }
    if (key == "n") spec.n = value;
    else if (key == "d") spec.d = value;
    else if (key == "unimodular") spec.unimodular = value;
    else if (key == "nu") spec.nu = value;
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(value);
    else throw validation_error("unknown generator parameter '" + key + "'");
  }
  return spec;
}

inline OperatorTuple make_instance(const InstanceSpec& spec) {
  if (spec.kind == "normal") {
    const Index u = spec.unimodular < 0 ? (spec.n + 1) / 2 : spec.unimodular;
    return gen_commuting_normal(spec.n, spec.d, u, spec.seed);
  }
  if (spec.kind == "poly") return gen_poly_tuple(spec.n, spec.d, spec.seed);
  if (spec.kind == "mixed") {
    const Index nu = spec.nu < 0 ? (spec.n + 1) / 2 : spec.nu;
    if (nu < 0 || nu > spec.n)
      throw validation_error("mixed instance: nu out of range");
    OperatorTuple unitary_part, pure_part;
    if (nu > 0)
      unitary_part = gen_commuting_normal(nu, spec.d, nu, spec.seed);
    if (spec.n - nu > 0)
      pure_part = gen_poly_tuple(spec.n - nu, spec.d,
                                 spec.seed ^ 0x9e3779b97f4a7c15ULL);
    return gen_mixed_direct_sum(unitary_part, pure_part);
  }
  throw validation_error("unknown instance kind '" + spec.kind + "'");
}

// ---------------------------------------------------------------------------
// Full analysis of one tuple
// ---------------------------------------------------------------------------

struct Analysis {
  OperatorTuple t;
  CMatrix P;
  AsymptoticLimit limit;
  OperatorSubspace toeplitz_t;
  bool pure = false;
  std::optional<PseudoExtension> douglas;
  std::optional<StinespringBundle> stine;
  std::optional<EquivalenceResult> equivalence;
};

inline Analysis analyze_instance(const OperatorTuple& t, const RunConfig& config,
                                 bool with_extensions = true) {
  Analysis a;
  a.t = t;
  require_valid(t, std::max(config.tol, 1e-8));
  a.P = product_contraction(t);
  a.limit = asymptotic_limit(a.P, config.tol * 1e-2, config.max_doublings,
                             config.purity_tol);
  a.toeplitz_t = toeplitz_basis(t, config.rank_tol);
  a.pure = is_adjoint_pure(t, a.limit, config.purity_tol);
  if (with_extensions && !a.pure) {
    a.douglas = canonical_extension_douglas(t, a.limit, config);
    a.stine = canonical_extension_stinespring(t, a.limit, config);
    a.equivalence = equivalence_unitary(*a.douglas, a.stine->ext,
                                        std::max(config.tol, 1e-6), config);
  }
  return a;
}

// ---------------------------------------------------------------------------
// Aggregated report
// ---------------------------------------------------------------------------

struct Report {
  std::string instance;
  RunConfig config;
  std::vector<std::pair<std::string, ValidationReport>> sections;
  std::vector<std::string> warnings;
  double elapsed_ms = 0.0;

  ValidationReport& section(const std::string& title) {
    sections.emplace_back(title, ValidationReport{});
    return sections.back().second;
  }

  bool pass() const {
    for (const auto& [title, rep] : sections)
      if (!rep.passed()) return false;
    return true;
  }

  /// Timings are the one nondeterministic field; batch runs drop them so the
  /// emitted document is byte-reproducible for a given seed.
  Json to_json(bool with_timing = true) const {
    Json j;
    j["instance"] = instance;
    j["config"] = config_to_json(config);
    Json secs = Json::array();
    for (const auto& [title, rep] : sections) {
      Json s = report_to_json(rep);
      s["section"] = title;
      secs.push_back(std::move(s));
    }
    j["sections"] = std::move(secs);
    j["warnings"] = warnings;
    j["pass"] = pass();
    if (with_timing) j["elapsed_ms"] = elapsed_ms;
    return j;
  }
};

namespace detail {

inline bool all_unitary(const OperatorTuple& t, double tol = 1e-8) {
  for (const auto& op : t.T)
    if (op_norm(op.adjoint() * op - CMatrix::Identity(t.n, t.n)) > tol)
      return false;
  return true;
}

}  // namespace detail

/// Runs every verification suite on one instance. Pure instances skip the
/// extension sections by design; everything else must pass.
inline Report run_verify_all(const OperatorTuple& t, const std::string& desc,
                             const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.instance = desc;
  report.config = config;
  report.warnings.push_back(
      "averaging projection realized by Cesaro means of the conjugation map");
  if (t.d() == 1)
    report.warnings.push_back("single-operator tuple (d = 1)");

  report.section("tuple-validation") = validate(t, std::max(config.tol, 1e-8));
  Analysis a = analyze_instance(t, config);

  {
    ValidationReport& sec = report.section("asymptotic-limit");
    sec.add("limit-psd", "asymptotic-limit",
            std::max(0.0, -min_hermitian_eigenvalue(a.limit.Q)), 1e-9);
    sec.add("limit-below-identity", "asymptotic-limit",
            std::max(0.0, -min_hermitian_eigenvalue(
                              CMatrix::Identity(t.n, t.n) - a.limit.Q)),
            1e-9);
    sec.add("stop-residual", "asymptotic-limit", a.limit.residual,
            config.tol * 1e-2);
    if (a.limit.indeterminate)
      report.warnings.push_back(
          "indeterminate purity: spectrum inside the critical band at the unit circle");
  }

  report.section("compression-inequality") =
      verify_compression_inequality(t, a.limit.Q, config.tol);

  {
    ValidationReport& sec = report.section("toeplitz-space");
    NontrivialityCertificate cert = nontriviality_certificate(t, config);
    sec.merge(cert.report);
    sec.note("toeplitz dimension " + std::to_string(cert.toeplitz_dim) +
             ", ||Q|| " + std::to_string(cert.q_norm));
    double in_tp = 0.0;
    for (Index i = 0; i < a.toeplitz_t.dim(); ++i) {
      const CMatrix b = a.toeplitz_t.element(i);
      in_tp = std::max(in_tp, op_norm(a.P.adjoint() * b * a.P - b));
    }
    sec.add("contained-in-product-space", "toeplitz-of-product", in_tp, config.tol);
    double star = 0.0;
    for (Index i = 0; i < a.toeplitz_t.dim(); ++i)
      star = std::max(star, span_membership_residual(
                                a.toeplitz_t.basis,
                                vec(a.toeplitz_t.element(i).adjoint())));
    sec.add("star-closed", "star-closure", star, config.tol);
    if (detail::all_unitary(t)) {
      OperatorSubspace comm = commutant_basis(t, config.rank_tol);
      sec.add("equals-commutant-for-unitaries", "toeplitz-commutant-identity",
              subspace_distance(a.toeplitz_t.basis, comm.basis), 1e-7);
    }
  }

  if (a.pure) {
    CPProjection phi = phi_projection(a.P, std::min(config.tol, 1e-8),
                                      config.max_doublings);
    report.section("phi-projection") =
        verify_phi(phi, a.P, t, a.limit.Q, config);
    report.warnings.push_back("pure instance: extension suites skipped");
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return report;
  }

  report.section("phi-projection") =
      verify_phi(a.stine->phi, a.P, t, a.limit.Q, config, &a.stine->alg);
  report.section("douglas-extension") =
      verify_pseudo_extension(t, *a.douglas, config.tol, &a.limit, config);
  {
    ValidationReport& sec = report.section("stinespring-extension");
    sec.merge(verify_cstar(a.stine->alg, config.tol));
    sec.merge(verify_stinespring(a.stine->triple, a.stine->alg, a.stine->phi,
                                 std::max(config.tol, 1e-7)));
    sec.merge(verify_pseudo_extension(t, a.stine->ext, std::max(config.tol, 1e-7),
                                      &a.limit, config));
  }
  report.section("uniqueness") = a.equivalence->report;

  OperatorSubspace commutant_u = commutant_basis(a.stine->ext.U, config.rank_tol);
  report.section("gamma-compression") =
      gamma_compression(a.stine->ext, commutant_u, t, config);
  report.section("pi-representation") =
      pi_representation(a.stine->triple, a.stine->alg, a.stine->phi,
                        a.toeplitz_t, a.stine->ext, config);
  report.section("theta-homomorphism") =
      theta_homomorphism(a.stine->triple, a.stine->alg, t, a.stine->ext,
                         a.limit.Q, config, &*a.douglas, &a.equivalence->W);

  {
    ValidationReport& sec = report.section("commutant-extension");
    OperatorSubspace commutant_t = commutant_basis(t, config.rank_tol);
    Rng sampler = Rng(config.seed).fork("commutant-extension");
    double worst = 0.0;
    for (int s = 0; s < config.samples; ++s) {
      CMatrix x = CMatrix::Zero(t.n, t.n);
      for (Index i = 0; i < commutant_t.dim(); ++i)
        x += sampler.cgaussian() * commutant_t.element(i);
      const double nn = op_norm(x);
      if (nn > 1e-14) x /= nn;
      OperatorExtensionResult r = commutant_extension(t, *a.douglas, x, config.tol);
      worst = std::max(worst, r.report.max_residual());
      if (!r.report.passed()) sec.merge(r.report);
    }
    sec.add("sampled-commutant-extensions", "commutant-extension-bound", worst,
            config.tol);
  }

  {
    ValidationReport& sec = report.section("intertwiner-extension");
    Rng sampler = Rng(config.seed).fork("intertwiner");
    const CMatrix v = sampler.haar_unitary(t.n);
    OperatorTuple tb;
    tb.n = t.n;
    for (const auto& op : t.T) tb.T.push_back(v * op * v.adjoint());
    Analysis ab = analyze_instance(tb, config, true);
    OperatorExtensionResult r =
        intertwiner_extension(t, *a.douglas, tb, *ab.douglas, v, config.tol);
    sec.merge(r.report);
  }

  {
    ValidationReport& sec = report.section("factoring");
    PseudoExtension scaled = *a.douglas;
    scaled.J *= 0.7;
    scaled.canonical = false;
    FactorResult f1 =
        factor_through_canonical(t, *a.douglas, scaled, config.tol, &a.limit, config);
    sec.merge(f1.report);
    const Index m = a.douglas->m();
    PseudoExtension inflated;
    inflated.canonical = false;
    inflated.J = CMatrix(2 * m, t.n);
    inflated.J.topRows(m) = 0.8 * a.douglas->J;
    inflated.J.bottomRows(m) = 0.5 * a.douglas->J;
    for (const auto& u : a.douglas->U) {
      CMatrix w = CMatrix::Zero(2 * m, 2 * m);
      w.topLeftCorner(m, m) = u;
      w.bottomRightCorner(m, m) = u;
      inflated.U.push_back(std::move(w));
    }
    FactorResult f2 =
        factor_through_canonical(t, *a.douglas, inflated, config.tol, &a.limit, config);
    sec.merge(f2.report);
  }

  {
    ValidationReport& sec = report.section("isometry-characterization");
    const bool j_isometry =
        op_norm(a.douglas->J.adjoint() * a.douglas->J -
                CMatrix::Identity(t.n, t.n)) <= config.tol;
    bool all_isometries = true;
    for (const auto& op : t.T)
      if (op_norm(op.adjoint() * op - CMatrix::Identity(t.n, t.n)) > config.tol)
        all_isometries = false;
    sec.add_floor("isometric-embedding-iff-isometries", "isometry-characterization",
                  j_isometry == all_isometries ? 1.0 : 0.0, 0.5);
  }

  report.elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return report;
}

/// Deterministic batch of generated instances covering every kind, with
/// n <= 12 and d <= 4.
inline std::vector<InstanceSpec> default_roster() {
  std::vector<InstanceSpec> specs;
  std::uint64_t seed = 100;
  for (Index d = 1; d <= 4; ++d) {
    for (Index n : {2, 3, 4, 6, 8, 12}) {
      for (Index u : std::vector<Index>{0, 1, (n + 1) / 2, n}) {
        InstanceSpec s;
        s.kind = "normal";
        s.n = n;
        s.d = d;
        s.unimodular = u;
        s.seed = seed++;
        specs.push_back(s);
      }
    }
    for (Index n : {2, 3, 4, 5, 6, 8})
      for (int rep = 0; rep < 2; ++rep) {
        InstanceSpec s;
        s.kind = "poly";
        s.n = n;
        s.d = d;
        s.seed = seed++;
        specs.push_back(s);
      }
    for (auto [n, nu] : std::vector<std::pair<Index, Index>>{
             {2, 1}, {3, 1}, {4, 1}, {4, 2}, {5, 2}, {5, 3}, {6, 3}, {6, 2},
             {7, 3}, {8, 4}, {8, 2}, {9, 4}, {10, 5}, {12, 6}, {12, 3}}) {
      InstanceSpec s;
      s.kind = "mixed";
      s.n = n;
      s.d = d;
      s.nu = nu;
      s.seed = seed++;
      specs.push_back(s);
    }
  }
  return specs;
}

}  // namespace opext
