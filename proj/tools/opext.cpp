// Command-line surface: analyze / extend / verify-all / generate, JSON in and
// out. Exit codes: 0 all pass, 2 invalid input, 3 internal inconsistency or
// non-convergence, 4 operation undefined for the instance.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "opext/harness.hpp"
#include "opext/json_io.hpp"

namespace {

using namespace opext;

bool log_enabled() {
  const char* v = std::getenv("OPEXT_LOG");
  return v != nullptr && *v != '\0';
}

void log_line(const std::string& msg) {
  if (log_enabled()) std::cerr << "[opext] " << msg << "\n";
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    save_json(out_path, j);
}

OperatorTuple load_tuple(const std::string& input, const std::string& generate) {
  if (!generate.empty()) {
    InstanceSpec spec = parse_generate_spec(generate);
    log_line("generating " + spec.name());
    return make_instance(spec);
  }
  if (input.empty())
    throw validation_error("no input: give a tuple file or --generate");
  log_line("loading " + input);
  return tuple_from_json(load_json(input));
}

// An equivalence violation is a tolerance failure, never accepted; the
// offending instance is preserved for inspection before the error exits.
void dump_counterexample(const OperatorTuple& t, const std::string& why) {
  Json j = tuple_to_json(t);
  j["violation"] = why;
  const std::string path = "counterexample.json";
  save_json(path, j);
  std::cerr << "counterexample written to " << path << "\n";
}

int cmd_analyze(const std::string& input, const std::string& generate,
                const std::string& out, const RunConfig& config) {
  OperatorTuple t = load_tuple(input, generate);
  require_valid(t, std::max(config.tol, 1e-8));
  Analysis a = analyze_instance(t, config, /*with_extensions=*/false);
  NontrivialityCertificate cert;
  try {
    cert = nontriviality_certificate(t, config);
  } catch (const inconsistency_error& ex) {
    dump_counterexample(t, ex.what());
    throw;
  }

  Json j;
  j["instance"] = input.empty() ? generate : input;
  j["dim"] = t.n;
  j["d"] = t.d();
  j["q"] = matrix_to_json(a.limit.Q);
  j["q_norm"] = cert.q_norm;
  j["spectral_radius"] = cert.spectral_radius;
  j["pure"] = a.pure;
  j["purity_indeterminate"] = a.limit.indeterminate;
  j["toeplitz_dim"] = cert.toeplitz_dim;
  j["equivalence"] = report_to_json(cert.report);
  if (a.pure) j["note"] = "no nonzero unitary pseudo-extension exists";
  j["config"] = config_to_json(config);
  emit(j, out);
  return 0;
}

int cmd_extend(const std::string& input, const std::string& generate,
               const std::string& route, const std::string& out,
               const RunConfig& config) {
  OperatorTuple t = load_tuple(input, generate);
  Analysis a = analyze_instance(t, config, /*with_extensions=*/false);
  if (a.pure) {
    Json j;
    j["error"] = "tuple is pure: no nonzero unitary pseudo-extension exists";
    j["q_norm"] = op_norm(a.limit.Q);
    j["spectral_radius"] = a.limit.spectral_radius;
    emit(j, out);
    return 4;
  }
  Json j;
  j["instance"] = input.empty() ? generate : input;
  std::optional<PseudoExtension> douglas;
  std::optional<StinespringBundle> stine;
  if (route == "douglas" || route == "both") {
    douglas = canonical_extension_douglas(t, a.limit, config);
    j["douglas"] = extension_to_json(*douglas);
    j["douglas_report"] =
        report_to_json(verify_pseudo_extension(t, *douglas, config.tol, &a.limit, config));
  }
  if (route == "stinespring" || route == "both") {
    stine = canonical_extension_stinespring(t, a.limit, config);
    j["stinespring"] = extension_to_json(stine->ext);
    j["stinespring_triple"] = stinespring_to_json(stine->triple);
    ValidationReport rep = verify_pseudo_extension(
        t, stine->ext, std::max(config.tol, 1e-7), &a.limit, config);
    rep.note("averaging projection realized by Cesaro means of the conjugation map");
    j["stinespring_report"] = report_to_json(rep);
  }
  if (route == "both") {
    EquivalenceResult eq = equivalence_unitary(*douglas, stine->ext,
                                               std::max(config.tol, 1e-6), config);
    j["equivalence"] = {{"W", matrix_to_json(eq.W)},
                        {"report", report_to_json(eq.report)}};
  }
  emit(j, out);
  return 0;
}

int cmd_verify_all(const std::string& input, const std::string& generate,
                   bool batch, const std::string& out, const RunConfig& config) {
  if (batch) {
    Json reports = Json::array();
    bool all_pass = true;
    const auto roster = default_roster();
    int idx = 0;
    const auto start = std::chrono::steady_clock::now();
    for (const auto& spec : roster) {
      log_line("instance " + std::to_string(++idx) + "/" +
               std::to_string(roster.size()) + " " + spec.name());
      Report rep = run_verify_all(make_instance(spec), spec.name(), config);
      all_pass = all_pass && rep.pass();
      reports.push_back(rep.to_json(/*with_timing=*/false));
    }
    const double total_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
    Json j;
    j["suite"] = "batch";
    j["instances"] = roster.size();
    j["config"] = config_to_json(config);
    j["reports"] = std::move(reports);
    j["pass"] = all_pass;
    emit(j, out);
    std::cerr << "batch: " << roster.size() << " instances in "
              << total_ms / 1000.0 << " s, " << (all_pass ? "all pass" : "FAILURES")
              << "\n";
    return all_pass ? 0 : 3;
  }
  OperatorTuple t = load_tuple(input, generate);
  try {
    Report rep = run_verify_all(t, input.empty() ? generate : input, config);
    emit(rep.to_json(), out);
    return rep.pass() ? 0 : 3;
  } catch (const inconsistency_error& ex) {
    dump_counterexample(t, ex.what());
    throw;
  }
}

int cmd_generate(const std::string& spec_text, const std::string& out) {
  InstanceSpec spec = parse_generate_spec(spec_text);
  OperatorTuple t = make_instance(spec);
  Json j = tuple_to_json(t);
  j["name"] = spec.name();
  emit(j, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-dimensional laboratory for Toeplitz spaces and unitary "
               "pseudo-extensions of commuting contraction tuples"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  RunConfig config;
  app.add_option("--tol", config.tol, "check tolerance");
  app.add_option("--rank-tol", config.rank_tol, "relative rank cutoff");
  app.add_option("--purity-tol", config.purity_tol, "||Q|| threshold for purity");
  app.add_option("--gram-cutoff", config.gram_cutoff,
                 "relative kernel cutoff of the dilation Gram matrix");
  app.add_option("--max-doublings", config.max_doublings, "iteration cap");
  app.add_option("--levels", config.levels, "matricial levels sampled");
  app.add_option("--samples", config.samples, "samples per stochastic check");
  app.add_option("--seed", config.seed, "sampling seed");
  app.add_flag("--snap-unitary", config.snap_unitary,
               "replace near-unitary factors by their polar factor");

  std::string input, generate, out, route = "douglas", gen_spec;
  bool batch = false;

  CLI::App* analyze = app.add_subcommand("analyze", "purity, Q and Toeplitz dimension");
  analyze->add_option("input", input, "tuple JSON file");
  analyze->add_option("--generate", generate, "generator spec kind:k=v,...");
  analyze->add_option("--out", out, "output file (default stdout)");

  CLI::App* extend = app.add_subcommand("extend", "construct the canonical extension");
  extend->add_option("input", input, "tuple JSON file");
  extend->add_option("--generate", generate, "generator spec kind:k=v,...");
  extend->add_option("--route", route, "douglas | stinespring | both")
      ->check(CLI::IsMember({"douglas", "stinespring", "both"}));
  extend->add_option("--out", out, "output file (default stdout)");

  CLI::App* verify = app.add_subcommand("verify-all", "run every verification suite");
  verify->add_option("input", input, "tuple JSON file");
  verify->add_option("--generate", generate, "generator spec kind:k=v,...");
  verify->add_flag("--batch", batch, "run the full generated batch");
  verify->add_option("--out", out, "output file (default stdout)");

  CLI::App* gen = app.add_subcommand("generate", "write a deterministic tuple file");
  gen->add_option("spec", gen_spec, "generator spec kind:k=v,...")->required();
  gen->add_option("--out", out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    config.check();
    if (analyze->parsed()) return cmd_analyze(input, generate, out, config);
    if (extend->parsed()) return cmd_extend(input, generate, route, out, config);
    if (verify->parsed()) return cmd_verify_all(input, generate, batch, out, config);
    if (gen->parsed()) return cmd_generate(gen_spec, out);
  } catch (const opext::validation_error& ex) {
    std::cerr << "error (invalid input): " << ex.what() << "\n";
    return 2;
  } catch (const opext::unsupported_error& ex) {
    std::cerr << "error (not defined for this instance): " << ex.what() << "\n";
    return 4;
  } catch (const std::exception& ex) {
    std::cerr << "error (internal inconsistency): " << ex.what() << "\n";
    return 3;
  }
  return 0;
}
