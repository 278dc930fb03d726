#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opman/spin_product.hpp"
#include "opman/types.hpp"

namespace opman {

/// Count of singular values at or above the rank cutoff.
inline int numerical_rank(const Matrix& m, double threshold = eps_rank) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] >= threshold) ++rank;
  return rank;
}

/// One basis entry: a vector together with its exact support.
struct LocalONBEntry {
  Vector u;
  CellSet support;
};

/// Family (u_l, C_l) with pointwise products delta_lm on C_l and jointly
/// complete fibers. Supports partition the N fiber dimensions.
struct LocalONB {
  std::vector<LocalONBEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
};

/// Pointwise spin dimension m(x_k) and the strata D_m it induces.
/// `ids` fixes the canonical cell order; strata hold indices into it.
struct SpinDimensionProfile {
  std::vector<std::string> ids;
  std::map<std::string, int> m;
  std::map<int, CellSet> strata;

  bool operator==(const SpinDimensionProfile&) const = default;

  int at(const std::string& id) const {
    auto it = m.find(id);
    if (it == m.end()) throw InputError("unknown cell id '" + id + "'");
    return it->second;
  }
  int at_index(int k) const { return at(ids[static_cast<std::size_t>(k)]); }
  int total() const {
    int sum = 0;
    for (const auto& [_, mk] : m) sum += mk;
    return sum;
  }
};

/// Components of a vector in a local ONB: values[l][i] is the density
/// h_{v,u_l} at the i-th cell of entry l's support. Zero off support by
/// construction.
struct ComponentFunctions {
  std::vector<std::vector<Complex>> values;
};

/// Per-cell m_k x N blocks G_k mapping vectors to spinor components.
/// Valid gauges are local (G_k = G_k P_k), pointwise coisometric
/// (mu_k G_k G_k^* = I) and globally unitary (sum mu_k G_k^* G_k = I).
struct Gauge {
  int hilbert_dim = 0;
  std::vector<double> weights;
  std::vector<Matrix> blocks;
  SpinDimensionProfile profile;

  int cell_count() const { return static_cast<int>(blocks.size()); }
};

/// Orthonormal frame spanning the cyclic subspace span{P_k u}. Columns
/// are the normalized nonzero P_k u in canonical cell order.
inline Matrix cyclic_subspace_basis(const OperatorManifold& om, const Vector& u) {
  if (u.size() != om.hilbert_dim())
    throw InputError("vector length does not match hilbert dimension");
  std::vector<Vector> cols;
  for (int k = 0; k < om.cell_count(); ++k) {
    Vector c = om.project(k, u);
    double norm = c.norm();
    if (norm >= eps_rank) cols.push_back(c / norm);
  }
  Matrix out(om.hilbert_dim(), static_cast<int>(cols.size()));
  for (int j = 0; j < out.cols(); ++j) out.col(j) = cols[static_cast<std::size_t>(j)];
  return out;
}

/// Greedy fiberwise construction. Each seed vector is orthogonalized
/// against the cyclic spans of the previous entries (two passes), its
/// surviving per-cell components define the support, and the entry is
/// the cellwise normalization u = sum_{k in C} sqrt(mu_k)/|c_k| * c_k.
/// Seeds that vanish after orthogonalization produce no entry.
inline LocalONB construct_local_onb(const OperatorManifold& om, const Matrix& seed) {
  require_well_formed(om);
  const int big_n = om.hilbert_dim();
  const int cell_count = om.cell_count();
  if (seed.rows() != big_n || seed.cols() != big_n)
    throw InputError("seed must be a square matrix of hilbert dimension");
  if (numerical_rank(seed) != big_n) throw InputError("seed basis is rank-deficient");

  // Used directions per fiber, in frame coordinates (r_k x used_k).
  std::vector<Matrix> used(static_cast<std::size_t>(cell_count));
  for (int k = 0; k < cell_count; ++k)
    used[static_cast<std::size_t>(k)] = Matrix(om.frame(k).cols(), 0);

  LocalONB onb;
  for (int l = 0; l < big_n; ++l) {
    std::vector<Vector> coords(static_cast<std::size_t>(cell_count));
    double norm_sq = 0.0;
    for (int k = 0; k < cell_count; ++k) {
      Vector y = om.frame(k).adjoint() * seed.col(l);
      const Matrix& q = used[static_cast<std::size_t>(k)];
      if (q.cols() > 0) {
        y -= q * (q.adjoint() * y);
        y -= q * (q.adjoint() * y);
      }
      norm_sq += y.squaredNorm();
      coords[static_cast<std::size_t>(k)] = std::move(y);
    }
    if (std::sqrt(norm_sq) < eps_rank) continue;

    LocalONBEntry entry;
    entry.u = Vector::Zero(big_n);
    for (int k = 0; k < cell_count; ++k) {
      const Vector& y = coords[static_cast<std::size_t>(k)];
      double density = y.squaredNorm() / om.weight(k);
      if (density < eps_rank) continue;
      double norm = y.norm();
      entry.support.push_back(k);
      entry.u += om.frame(k) * (y * (std::sqrt(om.weight(k)) / norm));
      Matrix& q = used[static_cast<std::size_t>(k)];
      q.conservativeResize(Eigen::NoChange, q.cols() + 1);
      q.col(q.cols() - 1) = y / norm;
    }
    if (entry.support.empty()) continue;
    onb.entries.push_back(std::move(entry));
  }
  return onb;
}

inline LocalONB construct_local_onb(const OperatorManifold& om) {
  return construct_local_onb(om, Matrix::Identity(om.hilbert_dim(), om.hilbert_dim()));
}

/// Four named checks: the pointwise delta property, exact supports at
/// the rank cutoff, joint completeness of the projected entries, and
/// the support-size count. Count-style checks use threshold 0.
inline ValidationReport verify_local_onb(const OperatorManifold& om, const LocalONB& onb,
                                         double tol = eps_local) {
  require_well_formed(om);
  const int cell_count = om.cell_count();
  const int big_n = om.hilbert_dim();
  const int entry_count = onb.size();
  ValidationReport report;

  // Frame coordinates of every entry at every cell, computed once.
  std::vector<std::vector<Vector>> coords(static_cast<std::size_t>(entry_count));
  for (int l = 0; l < entry_count; ++l) {
    const Vector& u = onb.entries[static_cast<std::size_t>(l)].u;
    if (u.size() != big_n) throw InputError("entry length does not match hilbert dimension");
    coords[static_cast<std::size_t>(l)].reserve(static_cast<std::size_t>(cell_count));
    for (int k = 0; k < cell_count; ++k)
      coords[static_cast<std::size_t>(l)].push_back(om.frame(k).adjoint() * u);
  }

  double ortho_residual = 0.0;
  for (int l = 0; l < entry_count; ++l)
    for (int mm = 0; mm < entry_count; ++mm)
      for (int k = 0; k < cell_count; ++k) {
        const Vector& a = coords[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
        const Vector& b = coords[static_cast<std::size_t>(mm)][static_cast<std::size_t>(k)];
        Complex h = a.size() == 0 ? Complex(0.0) : inner(a, b) / om.weight(k);
        Complex expected =
            (l == mm && contains(onb.entries[static_cast<std::size_t>(l)].support, k)) ? 1.0 : 0.0;
        ortho_residual = std::max(ortho_residual, std::abs(h - expected));
      }
  report.add("onb_orthonormality", ortho_residual, tol);

  int support_mismatches = 0;
  for (int l = 0; l < entry_count; ++l)
    for (int k = 0; k < cell_count; ++k) {
      const Vector& a = coords[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
      double density = a.size() == 0 ? 0.0 : a.squaredNorm() / om.weight(k);
      bool claimed = contains(onb.entries[static_cast<std::size_t>(l)].support, k);
      if ((density >= eps_rank) != claimed) ++support_mismatches;
    }
  report.add("onb_support_exactness", static_cast<double>(support_mismatches), 0.0);

  long support_total = 0;
  for (const auto& entry : onb.entries) support_total += static_cast<long>(entry.support.size());
  Matrix stacked(big_n, support_total);
  int col = 0;
  for (int l = 0; l < entry_count; ++l)
    for (int k : onb.entries[static_cast<std::size_t>(l)].support)
      stacked.col(col++) =
          om.frame(k) * coords[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
  report.add("onb_completeness_rank", static_cast<double>(big_n - numerical_rank(stacked)), 0.0);
  report.add("onb_support_count", static_cast<double>(std::labs(support_total - big_n)), 0.0);

  return report;
}

namespace detail {
inline void require_verified_onb(const OperatorManifold& om, const LocalONB& onb) {
  auto report = verify_local_onb(om, onb, eps_local);
  if (const CheckResult* fail = report.first_failure())
    throw InputError("local basis fails check '" + fail->name + "'");
}
}  // namespace detail

/// Components h_{v,u_l} restricted to the supports C_l. Unitary onto
/// its image: the weighted component norm equals the vector norm.
inline ComponentFunctions representation_map(const OperatorManifold& om, const LocalONB& onb,
                                             const Vector& v) {
  if (v.size() != om.hilbert_dim())
    throw InputError("vector length does not match hilbert dimension");
  detail::require_verified_onb(om, onb);
  ComponentFunctions comps;
  comps.values.reserve(onb.entries.size());
  for (const auto& entry : onb.entries) {
    std::vector<Complex> f;
    f.reserve(entry.support.size());
    for (int k : entry.support) {
      const Matrix& b = om.frame(k);
      Complex h = b.cols() == 0
                      ? Complex(0.0)
                      : inner(Vector(b.adjoint() * v), Vector(b.adjoint() * entry.u)) / om.weight(k);
      f.push_back(h);
    }
    comps.values.push_back(std::move(f));
  }
  return comps;
}

/// Inverse of representation_map: v = sum_l sum_{k in C_l} f_l(x_k) P_k u_l.
inline Vector reconstruct_from_components(const OperatorManifold& om, const LocalONB& onb,
                                          const ComponentFunctions& comps) {
  if (comps.values.size() != onb.entries.size())
    throw InputError("component count does not match basis entry count");
  Vector v = Vector::Zero(om.hilbert_dim());
  for (std::size_t l = 0; l < onb.entries.size(); ++l) {
    const auto& entry = onb.entries[l];
    const auto& f = comps.values[l];
    if (f.size() != entry.support.size())
      throw InputError("component support does not match basis entry support");
    for (std::size_t i = 0; i < f.size(); ++i)
      v += f[i] * om.project(entry.support[i], entry.u);
  }
  return v;
}

/// Max over cells of |h_{u,v} - sum_l h_{u,u_l} h_{u_l,v}|.
inline double pointwise_completeness_residual(const OperatorManifold& om, const LocalONB& onb,
                                              const Vector& u, const Vector& v) {
  auto huv = spin_scalar_product(om, u, v);
  std::vector<SpinDensity> hul, hlv;
  for (const auto& entry : onb.entries) {
    hul.push_back(spin_scalar_product(om, u, entry.u));
    hlv.push_back(spin_scalar_product(om, entry.u, v));
  }
  double residual = 0.0;
  for (const auto& cell : om.space.cells) {
    Complex sum = 0.0;
    for (std::size_t l = 0; l < hul.size(); ++l) sum += hul[l].at(cell.id) * hlv[l].at(cell.id);
    residual = std::max(residual, std::abs(huv.at(cell.id) - sum));
  }
  return residual;
}

namespace detail {
inline SpinDimensionProfile profile_from_counts(const MeasureSpace& space,
                                                const std::vector<int>& counts) {
  SpinDimensionProfile profile;
  for (int k = 0; k < space.cell_count(); ++k) {
    const std::string& id = space.cells[static_cast<std::size_t>(k)].id;
    profile.ids.push_back(id);
    profile.m[id] = counts[static_cast<std::size_t>(k)];
    profile.strata[counts[static_cast<std::size_t>(k)]].push_back(k);
  }
  return profile;
}
}  // namespace detail

/// Spin dimension per cell as the projection rank, by singular values
/// of the frame at the rank cutoff.
inline SpinDimensionProfile spin_dimension_profile(const OperatorManifold& om) {
  std::vector<int> counts(static_cast<std::size_t>(om.cell_count()));
  for (int k = 0; k < om.cell_count(); ++k)
    counts[static_cast<std::size_t>(k)] = numerical_rank(om.frame(k));
  return detail::profile_from_counts(om.space, counts);
}

/// Spin dimension per cell as the number of basis supports covering it.
/// Agrees with the rank form for every verified basis.
inline SpinDimensionProfile spin_dimension_profile(const OperatorManifold& om,
                                                   const LocalONB& onb) {
  std::vector<int> counts(static_cast<std::size_t>(om.cell_count()), 0);
  for (const auto& entry : onb.entries)
    for (int k : entry.support) ++counts[static_cast<std::size_t>(k)];
  return detail::profile_from_counts(om.space, counts);
}

/// Gauge whose block rows at cell k are (P_k u_l)^* / mu_k for the
/// entries covering k, in ascending entry order.
inline Gauge gauge_from_local_onb(const OperatorManifold& om, const LocalONB& onb) {
  Gauge g;
  g.hilbert_dim = om.hilbert_dim();
  g.profile = spin_dimension_profile(om, onb);
  for (int k = 0; k < om.cell_count(); ++k) {
    g.weights.push_back(om.weight(k));
    std::vector<int> rows;
    for (int l = 0; l < onb.size(); ++l)
      if (contains(onb.entries[static_cast<std::size_t>(l)].support, k)) rows.push_back(l);
    Matrix block(static_cast<int>(rows.size()), om.hilbert_dim());
    for (std::size_t r = 0; r < rows.size(); ++r)
      block.row(static_cast<int>(r)) =
          om.project(k, onb.entries[static_cast<std::size_t>(rows[r])].u).adjoint() / om.weight(k);
    g.blocks.push_back(std::move(block));
  }
  return g;
}

/// The gauge induced by the standard-seed local basis.
inline Gauge canonical_gauge(const OperatorManifold& om) {
  return gauge_from_local_onb(om, construct_local_onb(om));
}

/// Largest violation of the two gauge identities checkable without the
/// ambient manifold: pointwise coisometry and global unitarity.
inline double gauge_self_residual(const Gauge& g) {
  double residual = 0.0;
  Matrix total = Matrix::Zero(g.hilbert_dim, g.hilbert_dim);
  for (int k = 0; k < g.cell_count(); ++k) {
    const Matrix& block = g.blocks[static_cast<std::size_t>(k)];
    double w = g.weights[static_cast<std::size_t>(k)];
    Matrix point = w * (block * block.adjoint());
    point -= Matrix::Identity(block.rows(), block.rows());
    residual = std::max(residual, max_abs(point));
    total += w * (block.adjoint() * block);
  }
  total -= Matrix::Identity(g.hilbert_dim, g.hilbert_dim);
  return std::max(residual, max_abs(total));
}

/// gauge_self_residual plus the locality identity G_k = G_k P_k.
inline double gauge_residual(const OperatorManifold& om, const Gauge& g) {
  if (g.hilbert_dim != om.hilbert_dim() || g.cell_count() != om.cell_count())
    throw IncompatibleError("gauge shape does not match manifold");
  double residual = gauge_self_residual(g);
  for (int k = 0; k < om.cell_count(); ++k) {
    const Matrix& block = g.blocks[static_cast<std::size_t>(k)];
    if (block.rows() == 0) continue;
    Matrix local = block - block * om.projection(k);
    residual = std::max(residual, max_abs(local));
  }
  return residual;
}

}  // namespace opman
