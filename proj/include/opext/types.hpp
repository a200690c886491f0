#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace opext {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes, so the distinction matters:
//   validation_error    -> malformed or out-of-contract input
//   unsupported_error   -> operation undefined for this instance
//   inconsistency_error -> two certificates of the same fact disagree
//   convergence_error   -> an iteration hit its cap without stabilizing
// ---------------------------------------------------------------------------

class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

class validation_error : public error {
 public:
  using error::error;
};

class unsupported_error : public error {
 public:
  using error::error;
};

class inconsistency_error : public error {
 public:
  using error::error;
};

class convergence_error : public error {
 public:
  using error::error;
};

// ---------------------------------------------------------------------------
// Check records and reports
// ---------------------------------------------------------------------------

/// One verified fact: a named residual against a tolerance, tagged with the
/// operator-theoretic law it certifies ("brown-halmos", "stinespring-identity",
/// ...) so a failing report points at the violated property.
struct CheckRecord {
  std::string name;
  std::string law;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct ValidationReport {
  std::vector<CheckRecord> checks;
  std::vector<std::string> notes;

  void add(std::string name, std::string law, double residual, double tolerance) {
    checks.push_back({std::move(name), std::move(law), residual, tolerance,
                      residual <= tolerance});
  }

  /// For checks where the "residual" is a quantity that must exceed a floor
  /// (e.g. nonzeroness); pass iff value > floor.
  void add_floor(std::string name, std::string law, double value, double floor) {
    checks.push_back({std::move(name), std::move(law), value, floor, value > floor});
  }

  void note(std::string text) { notes.push_back(std::move(text)); }

  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  double max_residual() const {
    double r = 0.0;
    for (const auto& c : checks) r = std::max(r, c.residual);
    return r;
  }

  const CheckRecord* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  void merge(const ValidationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
    notes.insert(notes.end(), other.notes.begin(), other.notes.end());
  }

  /// Throws inconsistency_error listing every failed check.
  void require_all(const std::string& context) const {
    if (passed()) return;
    std::string msg = context + ": failed checks:";
    for (const auto& c : checks)
      if (!c.pass)
        msg += " [" + c.name + " residual=" + std::to_string(c.residual) +
               " tol=" + std::to_string(c.tolerance) + "]";
    throw inconsistency_error(msg);
  }
};

// ---------------------------------------------------------------------------
// Run configuration shared by the CLI and the batch harness
// ---------------------------------------------------------------------------

struct RunConfig {
  double tol = 1e-8;          // generic check tolerance
  double rank_tol = 1e-9;     // relative singular-value cutoff
  double purity_tol = 1e-6;   // ||Q|| at or below this means pure
  double gram_cutoff = 1e-6;  // relative kernel cutoff of the dilation Gram
  int max_doublings = 60;     // cap for the squaring/averaging iterations
  int levels = 3;             // matricial levels sampled for complete bounds
  int samples = 20;           // random samples per stochastic check
  std::uint64_t seed = 1;
  bool snap_unitary = false;

  void check() const {
    if (!(tol > 0) || !(rank_tol > 0) || !(purity_tol > 0) || !(gram_cutoff > 0))
      throw validation_error("config: tolerances must be positive");
    if (levels < 1) throw validation_error("config: levels must be >= 1");
    if (samples < 1) throw validation_error("config: samples must be >= 1");
    if (max_doublings < 1) throw validation_error("config: max_doublings must be >= 1");
  }
};

}  // namespace opext
