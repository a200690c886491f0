#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "opext/pseudoext.hpp"
#include "opext/cpstine.hpp"
#include "opext/tuple.hpp"
#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// Wire formats. Complex entries are [re, im]; matrices are row-major arrays
// of rows; tuples are {"dim": n, "d": d, "tuple": [matrix, ...]}.
// ---------------------------------------------------------------------------

using Json = nlohmann::json;

inline Json matrix_to_json(const CMatrix& a) {
  Json rows = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < a.cols(); ++j)
      row.push_back(Json::array({a(i, j).real(), a(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw validation_error("matrix: expected a non-empty array of rows");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.at(0).size());
  CMatrix a(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j.at(r);
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw validation_error("matrix: ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const Json& e = row.at(c);
      if (!e.is_array() || e.size() != 2 || !e.at(0).is_number() || !e.at(1).is_number())
        throw validation_error("matrix: entries must be [re, im]");
      a(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return a;
}

inline Json tuple_to_json(const OperatorTuple& t) {
  Json j;
  j["dim"] = t.n;
  j["d"] = t.d();
  Json ops = Json::array();
  for (const auto& op : t.T) ops.push_back(matrix_to_json(op));
  j["tuple"] = std::move(ops);
  return j;
}

inline OperatorTuple tuple_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("d") || !j.contains("tuple"))
    throw validation_error("tuple document: expected keys dim, d, tuple");
  OperatorTuple t;
  t.n = j.at("dim").get<Index>();
  const Index d = j.at("d").get<Index>();
  if (t.n < 1) throw validation_error("tuple document: dim must be >= 1");
  const Json& ops = j.at("tuple");
  if (!ops.is_array() || static_cast<Index>(ops.size()) != d)
    throw validation_error("tuple document: d does not match the operator list");
  for (const auto& op : ops) {
    CMatrix a = matrix_from_json(op);
    if (a.rows() != t.n || a.cols() != t.n)
      throw validation_error("tuple document: operator is not dim x dim");
    t.T.push_back(std::move(a));
  }
  return t;
}

inline Json extension_to_json(const PseudoExtension& e) {
  Json j;
  j["m"] = e.m();
  j["J"] = matrix_to_json(e.J);
  Json us = Json::array();
  for (const auto& u : e.U) us.push_back(matrix_to_json(u));
  j["U"] = std::move(us);
  j["canonical"] = e.canonical;
  j["route"] = route_name(e.route);
  return j;
}

inline PseudoExtension extension_from_json(const Json& j) {
  PseudoExtension e;
  e.J = matrix_from_json(j.at("J"));
  for (const auto& u : j.at("U")) e.U.push_back(matrix_from_json(u));
  e.canonical = j.at("canonical").get<bool>();
  const std::string route = j.value("route", "user");
  e.route = route == "douglas"      ? Route::douglas
            : route == "stinespring" ? Route::stinespring
                                     : Route::user;
  if (j.contains("m") && j.at("m").get<Index>() != e.m())
    throw validation_error("extension document: m does not match J");
  return e;
}

inline Json stinespring_to_json(const StinespringTriple& s) {
  Json j;
  j["k"] = s.k;
  Json images = Json::array();
  for (const auto& img : s.pi_basis_images) images.push_back(matrix_to_json(img));
  j["pi_basis_images"] = std::move(images);
  j["J"] = matrix_to_json(s.J);
  return j;
}

inline Json report_to_json(const ValidationReport& rep) {
  Json j;
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"law", c.law},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
  j["checks"] = std::move(checks);
  j["notes"] = rep.notes;
  j["pass"] = rep.passed();
  return j;
}

inline Json config_to_json(const RunConfig& c) {
  return Json{{"tol", c.tol},
              {"rank_tol", c.rank_tol},
              {"purity_tol", c.purity_tol},
              {"gram_cutoff", c.gram_cutoff},
              {"max_doublings", c.max_doublings},
              {"levels", c.levels},
              {"samples", c.samples},
              {"seed", c.seed},
              {"snap_unitary", c.snap_unitary}};
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& ex) {
    throw validation_error("JSON parse error in " + path + ": " + ex.what());
  }
  return j;
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace opext
