#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opman {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Tolerance for the structural projection-valued-measure checks.
inline constexpr double eps_valid = 1e-10;
/// Cutoff below which a singular value or component norm counts as zero.
/// Every rank decision in the library goes through this threshold.
inline constexpr double eps_rank = 1e-8;
/// Contract tolerance for local-ONB and gauge identities.
inline constexpr double eps_local = 1e-9;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Malformed dimensions or inconsistent shapes, as opposed to a failed
/// numerical check on well-formed data.
struct StructureError : Error {
  using Error::Error;
};
/// A well-formed call with arguments outside an operation's domain.
struct InputError : Error {
  using Error::Error;
};
/// Two objects whose cell sets or spin-dimension profiles cannot be
/// identified with each other.
struct IncompatibleError : InputError {
  using InputError::InputError;
};
/// File syntax or schema violations; messages carry a path into the document.
struct ParseError : Error {
  using Error::Error;
};
/// A file parsed cleanly but its contents fail the validity checks.
struct ValidationError : Error {
  using Error::Error;
};

/// <x, y>: linear in x, anti-linear in y.
inline Complex inner(const Vector& x, const Vector& y) { return y.dot(x); }

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}
inline double max_abs(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

/// One atom of the discretized measure space.
struct Cell {
  std::string id;
  RealVector coords;  // length = manifold dimension
  double weight = 0.0;
};

struct MeasureSpace {
  int dim = 0;  // manifold dimension n
  std::vector<Cell> cells;  // order is canonical and fixed

  int cell_count() const { return static_cast<int>(cells.size()); }

  /// Index of a cell id, -1 if absent.
  int index_of(std::string_view id) const {
    for (int k = 0; k < cell_count(); ++k)
      if (cells[static_cast<std::size_t>(k)].id == id) return k;
    return -1;
  }
};

/// Sorted, duplicate-free cell indices; the discrete stand-in for a
/// measurable set.
using CellSet = std::vector<int>;

inline bool contains(const CellSet& s, int k) {
  return std::binary_search(s.begin(), s.end(), k);
}

inline CellSet set_union(const CellSet& a, const CellSet& b) {
  CellSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline CellSet set_intersection(const CellSet& a, const CellSet& b) {
  CellSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline CellSet set_difference(const CellSet& a, const CellSet& b) {
  CellSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline CellSet all_cells(const MeasureSpace& space) {
  CellSet out(static_cast<std::size_t>(space.cell_count()));
  for (int k = 0; k < space.cell_count(); ++k) out[static_cast<std::size_t>(k)] = k;
  return out;
}

/// Resolve cell ids to canonical indices; unknown ids are input errors.
inline CellSet resolve_cells(const MeasureSpace& space, const std::vector<std::string>& ids) {
  CellSet out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    int k = space.index_of(id);
    if (k < 0) throw InputError("unknown cell id '" + id + "'");
    out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// The spectral measure, stored as one orthonormal frame per cell.
/// frames[k] has shape N x r_k; the projection of cell k is B_k B_k^*.
struct SpectralMeasure {
  int hilbert_dim = 0;
  std::vector<Matrix> frames;
};

struct OperatorManifold {
  MeasureSpace space;
  SpectralMeasure measure;

  int dim() const { return space.dim; }
  int cell_count() const { return space.cell_count(); }
  int hilbert_dim() const { return measure.hilbert_dim; }
  double weight(int k) const { return space.cells[static_cast<std::size_t>(k)].weight; }
  const Matrix& frame(int k) const { return measure.frames[static_cast<std::size_t>(k)]; }

  /// P_k v without forming the dense projection.
  Vector project(int k, const Vector& v) const {
    const Matrix& b = frame(k);
    return b * (b.adjoint() * v);
  }

  /// Dense P_k = B_k B_k^*.
  Matrix projection(int k) const {
    const Matrix& b = frame(k);
    return b * b.adjoint();
  }
};

/// Shape consistency; throws StructureError. Numerical validity is a
/// separate concern (see validate_operator_manifold).
inline void require_well_formed(const OperatorManifold& om) {
  const int n = om.dim();
  const int big_n = om.hilbert_dim();
  const int cell_count = om.cell_count();
  if (n < 0) throw StructureError("manifold dimension must be nonnegative");
  if (big_n < 1) throw StructureError("hilbert dimension must be positive");
  if (cell_count < 1) throw StructureError("cell list must be nonempty");
  if (static_cast<int>(om.measure.frames.size()) != cell_count)
    throw StructureError("frame count does not match cell count");
  for (int k = 0; k < cell_count; ++k) {
    const Cell& c = om.space.cells[static_cast<std::size_t>(k)];
    if (c.coords.size() != n)
      throw StructureError("cell '" + c.id + "': coords length does not match manifold dimension");
    if (om.frame(k).rows() != big_n)
      throw StructureError("cell '" + c.id + "': frame row count does not match hilbert dimension");
  }
  for (int j = 0; j < cell_count; ++j)
    for (int k = j + 1; k < cell_count; ++k)
      if (om.space.cells[static_cast<std::size_t>(j)].id ==
          om.space.cells[static_cast<std::size_t>(k)].id)
        throw StructureError("duplicate cell id '" + om.space.cells[static_cast<std::size_t>(j)].id + "'");
}

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!(c.residual <= c.threshold)) return false;
    return true;
  }

  double max_residual() const {
    double r = 0.0;
    for (const auto& c : checks) r = std::max(r, c.residual);
    return r;
  }

  const CheckResult* first_failure() const {
    for (const auto& c : checks)
      if (!(c.residual <= c.threshold)) return &c;
    return nullptr;
  }

  void add(std::string name, double residual, double threshold) {
    checks.push_back({std::move(name), residual, threshold});
  }

  void append(const ValidationReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
};

}  // namespace opman
