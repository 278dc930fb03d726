#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "opman/core.hpp"
#include "opman/decomposition.hpp"
#include "opman/gauge.hpp"
#include "opman/types.hpp"

// JSON file formats, format header "opman/1". Complex numbers are
// [re, im] pairs, matrices are arrays of rows, empty matrices are [].
// Serialization uses shortest round-trip number formatting and sorted
// object keys, so equal data produces byte-identical files.

namespace opman {

namespace iodetail {

using json = nlohmann::json;

inline const json& member(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "/" + key + ": missing field");
  return *it;
}

inline std::string get_string(const json& j, const char* key, const std::string& path) {
  const json& v = member(j, key, path);
  if (!v.is_string()) throw ParseError(path + "/" + key + ": expected a string");
  return v.get<std::string>();
}

inline int get_count(const json& j, const char* key, const std::string& path, int min_value) {
  const json& v = member(j, key, path);
  if (!v.is_number_integer())
    throw ParseError(path + "/" + key + ": expected an integer");
  long long n = v.get<long long>();
  if (n < min_value || n > 1 << 20)
    throw ParseError(path + "/" + key + ": value out of range");
  return static_cast<int>(n);
}

inline double finite_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path + ": expected a finite number");
  return d;
}

inline Complex get_complex(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ParseError(path + ": expected [re, im]");
  return {finite_number(v[0], path + "/0"), finite_number(v[1], path + "/1")};
}

/// Matrix as array of rows; [] means zero rows or zero columns, with the
/// missing extent supplied by the caller.
inline Matrix get_matrix(const json& v, int rows, int cols, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array of rows");
  if (v.empty()) {
    if (rows > 0 && cols > 0) throw ParseError(path + ": expected " + std::to_string(rows) + " rows");
    return Matrix(std::max(rows, 0), std::max(cols, 0));
  }
  int got_rows = static_cast<int>(v.size());
  if (rows >= 0 && got_rows != rows)
    throw ParseError(path + ": expected " + std::to_string(rows) + " rows");
  int got_cols = -1;
  Matrix m;
  for (int i = 0; i < got_rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    std::string row_path = path + "/" + std::to_string(i);
    if (!row.is_array() || row.empty()) throw ParseError(row_path + ": expected a nonempty row");
    if (got_cols < 0) {
      got_cols = static_cast<int>(row.size());
      if (cols >= 0 && got_cols != cols)
        throw ParseError(row_path + ": expected " + std::to_string(cols) + " columns");
      m.resize(got_rows, got_cols);
    }
    if (static_cast<int>(row.size()) != got_cols)
      throw ParseError(row_path + ": ragged row");
    for (int jx = 0; jx < got_cols; ++jx)
      m(i, jx) = get_complex(row[static_cast<std::size_t>(jx)], row_path + "/" + std::to_string(jx));
  }
  return m;
}

inline void check_finite(double d, const std::string& what) {
  if (!std::isfinite(d)) throw InputError("non-finite number in " + what);
}

inline json complex_json(Complex z, const std::string& what) {
  check_finite(z.real(), what);
  check_finite(z.imag(), what);
  return json::array({z.real(), z.imag()});
}

inline json matrix_json(const Matrix& m, const std::string& what) {
  json rows = json::array();
  if (m.rows() == 0 || m.cols() == 0) return rows;
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j), what));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": invalid JSON: " + e.what());
  }
}

inline void write_file(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open file for writing");
  out << j.dump(2) << '\n';
  if (!out) throw Error(path + ": write failed");
}

inline void require_kind(const json& j, const char* kind) {
  if (get_string(j, "format", "") != "opman/1") throw ParseError("/format: unsupported format");
  if (get_string(j, "kind", "") != kind)
    throw ParseError("/kind: expected '" + std::string(kind) + "'");
}

inline const json& cells_array(const json& j) {
  const json& cells = member(j, "cells", "");
  if (!cells.is_array() || cells.empty()) throw ParseError("/cells: expected a nonempty array");
  return cells;
}

/// Profile header {id -> m} checked against the ids of the cells array.
inline SpinDimensionProfile get_profile(const json& j, const std::vector<std::string>& ids) {
  const json& p = member(j, "profile", "");
  if (!p.is_object()) throw ParseError("/profile: expected an object");
  SpinDimensionProfile profile;
  profile.ids = ids;
  std::set<std::string> known(ids.begin(), ids.end());
  for (const auto& [key, value] : p.items()) {
    if (!known.count(key)) throw ParseError("/profile: unknown cell id '" + key + "'");
    if (!value.is_number_integer() || value.get<long long>() < 0)
      throw ParseError("/profile/" + key + ": expected a nonnegative integer");
    profile.m[key] = static_cast<int>(value.get<long long>());
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (!profile.m.count(ids[k])) throw ParseError("/profile: missing cell id '" + ids[k] + "'");
    profile.strata[profile.m[ids[k]]].push_back(static_cast<int>(k));
  }
  return profile;
}

inline json profile_json(const SpinDimensionProfile& profile) {
  json p = json::object();
  for (const auto& [id, m] : profile.m) p[id] = m;
  return p;
}

inline std::string cell_path(int k) { return "/cells/" + std::to_string(k); }

inline double get_weight(const json& cell, const std::string& path) {
  double w = finite_number(member(cell, "weight", path), path + "/weight");
  if (!(w > 0.0)) throw ParseError(path + "/weight: weight must be positive");
  return w;
}

inline std::string get_id(const json& cell, const std::string& path, std::set<std::string>& seen) {
  std::string id = get_string(cell, "id", path);
  if (id.empty()) throw ParseError(path + "/id: empty cell id");
  if (!seen.insert(id).second) throw ParseError(path + "/id: duplicate cell id '" + id + "'");
  return id;
}

}  // namespace iodetail

inline void save_manifold(const OperatorManifold& om, const std::string& path) {
  using iodetail::json;
  require_well_formed(om);
  json j;
  j["format"] = "opman/1";
  j["kind"] = "manifold";
  j["manifold_dim"] = om.dim();
  j["hilbert_dim"] = om.hilbert_dim();
  json cells = json::array();
  for (int k = 0; k < om.cell_count(); ++k) {
    const Cell& c = om.space.cells[static_cast<std::size_t>(k)];
    iodetail::check_finite(c.weight, "cell '" + c.id + "'");
    json cell;
    cell["id"] = c.id;
    json coords = json::array();
    for (int i = 0; i < c.coords.size(); ++i) {
      iodetail::check_finite(c.coords[i], "cell '" + c.id + "'");
      coords.push_back(c.coords[i]);
    }
    cell["coords"] = std::move(coords);
    cell["weight"] = c.weight;
    cell["frame"] = iodetail::matrix_json(om.frame(k), "cell '" + c.id + "'");
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  iodetail::write_file(j, path);
}

/// Parses and shape-checks a manifold file without running the
/// numerical validity checks.
inline OperatorManifold load_manifold_unchecked(const std::string& path) {
  using iodetail::json;
  json j = iodetail::parse_file(path);
  iodetail::require_kind(j, "manifold");
  OperatorManifold om;
  om.space.dim = iodetail::get_count(j, "manifold_dim", "", 0);
  om.measure.hilbert_dim = iodetail::get_count(j, "hilbert_dim", "", 1);
  const json& cells = iodetail::cells_array(j);
  std::set<std::string> seen;
  for (int k = 0; k < static_cast<int>(cells.size()); ++k) {
    const json& cj = cells[static_cast<std::size_t>(k)];
    std::string path_k = iodetail::cell_path(k);
    Cell c;
    c.id = iodetail::get_id(cj, path_k, seen);
    c.weight = iodetail::get_weight(cj, path_k);
    const json& coords = iodetail::member(cj, "coords", path_k);
    if (!coords.is_array() || static_cast<int>(coords.size()) != om.space.dim)
      throw ParseError(path_k + "/coords: expected " + std::to_string(om.space.dim) + " numbers");
    c.coords = RealVector(om.space.dim);
    for (int i = 0; i < om.space.dim; ++i)
      c.coords[i] = iodetail::finite_number(coords[static_cast<std::size_t>(i)],
                                            path_k + "/coords/" + std::to_string(i));
    om.space.cells.push_back(std::move(c));
    om.measure.frames.push_back(iodetail::get_matrix(iodetail::member(cj, "frame", path_k),
                                                     om.measure.hilbert_dim, -1,
                                                     path_k + "/frame"));
  }
  require_well_formed(om);
  return om;
}

/// Loads and validates; invalid measures are rejected with the first
/// failing check and its residual in the message.
inline OperatorManifold load_manifold(const std::string& path, double tol = eps_valid) {
  OperatorManifold om = load_manifold_unchecked(path);
  ValidationReport report = validate_operator_manifold(om, tol);
  if (const CheckResult* fail = report.first_failure()) {
    std::ostringstream msg;
    msg << "validation failed: " << fail->name << " residual " << fail->residual << " exceeds "
        << fail->threshold;
    throw ValidationError(msg.str());
  }
  return om;
}

inline void save_gauge(const Gauge& g, const std::string& path) {
  using iodetail::json;
  if (static_cast<int>(g.weights.size()) != g.cell_count() ||
      g.profile.ids.size() != g.weights.size())
    throw StructureError("gauge cell lists are inconsistent");
  json j;
  j["format"] = "opman/1";
  j["kind"] = "gauge";
  j["hilbert_dim"] = g.hilbert_dim;
  j["profile"] = iodetail::profile_json(g.profile);
  json cells = json::array();
  for (int k = 0; k < g.cell_count(); ++k) {
    const std::string& id = g.profile.ids[static_cast<std::size_t>(k)];
    iodetail::check_finite(g.weights[static_cast<std::size_t>(k)], "cell '" + id + "'");
    json cell;
    cell["id"] = id;
    cell["weight"] = g.weights[static_cast<std::size_t>(k)];
    cell["block"] = iodetail::matrix_json(g.blocks[static_cast<std::size_t>(k)], "cell '" + id + "'");
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  iodetail::write_file(j, path);
}

inline Gauge load_gauge(const std::string& path) {
  using iodetail::json;
  json j = iodetail::parse_file(path);
  iodetail::require_kind(j, "gauge");
  Gauge g;
  g.hilbert_dim = iodetail::get_count(j, "hilbert_dim", "", 1);
  const json& cells = iodetail::cells_array(j);
  std::set<std::string> seen;
  std::vector<std::string> ids;
  for (int k = 0; k < static_cast<int>(cells.size()); ++k)
    ids.push_back(iodetail::get_id(cells[static_cast<std::size_t>(k)], iodetail::cell_path(k), seen));
  g.profile = iodetail::get_profile(j, ids);
  for (int k = 0; k < static_cast<int>(cells.size()); ++k) {
    const json& cj = cells[static_cast<std::size_t>(k)];
    std::string path_k = iodetail::cell_path(k);
    g.weights.push_back(iodetail::get_weight(cj, path_k));
    g.blocks.push_back(iodetail::get_matrix(iodetail::member(cj, "block", path_k),
                                            g.profile.m[ids[static_cast<std::size_t>(k)]],
                                            g.hilbert_dim, path_k + "/block"));
  }
  return g;
}

inline void save_section(const WaveSection& psi, const std::string& path) {
  using iodetail::json;
  if (psi.values.size() != psi.profile.ids.size())
    throw StructureError("section cell lists are inconsistent");
  json j;
  j["format"] = "opman/1";
  j["kind"] = "section";
  j["profile"] = iodetail::profile_json(psi.profile);
  json cells = json::array();
  for (std::size_t k = 0; k < psi.values.size(); ++k) {
    json cell;
    cell["id"] = psi.profile.ids[k];
    json comps = json::array();
    for (int a = 0; a < psi.values[k].size(); ++a)
      comps.push_back(iodetail::complex_json(psi.values[k][a], "cell '" + psi.profile.ids[k] + "'"));
    cell["components"] = std::move(comps);
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  iodetail::write_file(j, path);
}

inline WaveSection load_section(const std::string& path) {
  using iodetail::json;
  json j = iodetail::parse_file(path);
  iodetail::require_kind(j, "section");
  const json& cells = iodetail::cells_array(j);
  std::set<std::string> seen;
  std::vector<std::string> ids;
  for (int k = 0; k < static_cast<int>(cells.size()); ++k)
    ids.push_back(iodetail::get_id(cells[static_cast<std::size_t>(k)], iodetail::cell_path(k), seen));
  WaveSection psi;
  psi.profile = iodetail::get_profile(j, ids);
  for (int k = 0; k < static_cast<int>(cells.size()); ++k) {
    const json& cj = cells[static_cast<std::size_t>(k)];
    std::string path_k = iodetail::cell_path(k);
    const json& comps = iodetail::member(cj, "components", path_k);
    int m = psi.profile.m[ids[static_cast<std::size_t>(k)]];
    if (!comps.is_array() || static_cast<int>(comps.size()) != m)
      throw ParseError(path_k + "/components: expected " + std::to_string(m) + " entries");
    Vector v(m);
    for (int a = 0; a < m; ++a)
      v[a] = iodetail::get_complex(comps[static_cast<std::size_t>(a)],
                                   path_k + "/components/" + std::to_string(a));
    psi.values.push_back(std::move(v));
  }
  return psi;
}

inline void save_field(const GaugeField& w, const std::string& path) {
  using iodetail::json;
  if (w.ids.size() != w.blocks.size()) throw StructureError("field cell lists are inconsistent");
  json j;
  j["format"] = "opman/1";
  j["kind"] = "field";
  json profile = json::object();
  for (std::size_t k = 0; k < w.ids.size(); ++k) {
    if (w.blocks[k].rows() != w.blocks[k].cols()) throw StructureError("field blocks must be square");
    profile[w.ids[k]] = static_cast<int>(w.blocks[k].rows());
  }
  j["profile"] = std::move(profile);
  json cells = json::array();
  for (std::size_t k = 0; k < w.ids.size(); ++k) {
    json cell;
    cell["id"] = w.ids[k];
    cell["matrix"] = iodetail::matrix_json(w.blocks[k], "cell '" + w.ids[k] + "'");
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  iodetail::write_file(j, path);
}

inline GaugeField load_field(const std::string& path) {
  using iodetail::json;
  json j = iodetail::parse_file(path);
  iodetail::require_kind(j, "field");
  const json& cells = iodetail::cells_array(j);
  std::set<std::string> seen;
  std::vector<std::string> ids;
  for (int k = 0; k < static_cast<int>(cells.size()); ++k)
    ids.push_back(iodetail::get_id(cells[static_cast<std::size_t>(k)], iodetail::cell_path(k), seen));
  SpinDimensionProfile profile = iodetail::get_profile(j, ids);
  GaugeField w;
  w.ids = ids;
  for (int k = 0; k < static_cast<int>(cells.size()); ++k) {
    const json& cj = cells[static_cast<std::size_t>(k)];
    std::string path_k = iodetail::cell_path(k);
    int m = profile.m[ids[static_cast<std::size_t>(k)]];
    w.blocks.push_back(
        iodetail::get_matrix(iodetail::member(cj, "matrix", path_k), m, m, path_k + "/matrix"));
  }
  return w;
}

}  // namespace opman
