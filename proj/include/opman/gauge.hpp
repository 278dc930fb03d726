#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opman/decomposition.hpp"
#include "opman/types.hpp"

namespace opman {

/// Spinor components per cell, aligned with the profile's cell order.
/// values[k] has length m(x_k).
struct WaveSection {
  SpinDimensionProfile profile;
  std::vector<Vector> values;
};

/// One unitary m_k x m_k block per cell, same cell order as the gauge
/// it transforms.
struct GaugeField {
  std::vector<std::string> ids;
  std::vector<Matrix> blocks;

  int cell_count() const { return static_cast<int>(blocks.size()); }
};

/// Largest violation of the two unitarity identities across all blocks.
inline double field_unitarity_residual(const GaugeField& w) {
  double residual = 0.0;
  for (const auto& block : w.blocks) {
    if (block.rows() != block.cols()) return 1.0 + static_cast<double>(block.rows());
    if (block.rows() == 0) continue;
    Matrix eye = Matrix::Identity(block.rows(), block.cols());
    residual = std::max(residual, max_abs(Matrix(block * block.adjoint() - eye)));
    residual = std::max(residual, max_abs(Matrix(block.adjoint() * block - eye)));
  }
  return residual;
}

namespace detail {
inline void require_valid_gauge(const Gauge& g) {
  if (gauge_self_residual(g) > eps_local) throw InputError("gauge fails the unitarity identities");
}
inline void require_section_matches(const Gauge& g, const WaveSection& psi) {
  if (psi.profile != g.profile) throw InputError("section profile does not match gauge profile");
  if (static_cast<int>(psi.values.size()) != g.cell_count())
    throw InputError("section cell count does not match gauge");
  for (int k = 0; k < g.cell_count(); ++k)
    if (psi.values[static_cast<std::size_t>(k)].size() != g.blocks[static_cast<std::size_t>(k)].rows())
      throw InputError("section component count does not match spin dimension");
}
}  // namespace detail

/// psi(x_k) = G_k v. Weighted section norm equals the vector norm.
inline WaveSection apply_gauge(const Gauge& g, const Vector& v) {
  detail::require_valid_gauge(g);
  if (v.size() != g.hilbert_dim)
    throw InputError("vector length does not match hilbert dimension");
  WaveSection psi;
  psi.profile = g.profile;
  psi.values.reserve(static_cast<std::size_t>(g.cell_count()));
  for (int k = 0; k < g.cell_count(); ++k)
    psi.values.push_back(g.blocks[static_cast<std::size_t>(k)] * v);
  return psi;
}

/// v = sum_k mu_k G_k^* psi(x_k); two-sided inverse of apply_gauge.
inline Vector invert_gauge(const Gauge& g, const WaveSection& psi) {
  detail::require_section_matches(g, psi);
  Vector v = Vector::Zero(g.hilbert_dim);
  for (int k = 0; k < g.cell_count(); ++k)
    v += g.weights[static_cast<std::size_t>(k)] *
         (g.blocks[static_cast<std::size_t>(k)].adjoint() * psi.values[static_cast<std::size_t>(k)]);
  return v;
}

/// The pointwise unitaries W_k = mu_k G1_k G2_k^* translating sections
/// of g2 into sections of g1. Requires identical profiles and weights.
inline GaugeField extract_gauge_transformation(const Gauge& g1, const Gauge& g2) {
  if (g1.hilbert_dim != g2.hilbert_dim)
    throw IncompatibleError("hilbert dimensions differ");
  if (g1.profile.ids != g2.profile.ids || g1.weights != g2.weights)
    throw IncompatibleError("gauges live on different cell sets");
  if (g1.profile != g2.profile)
    throw IncompatibleError("spin dimension profiles differ");
  GaugeField w;
  w.ids = g1.profile.ids;
  w.blocks.reserve(static_cast<std::size_t>(g1.cell_count()));
  for (int k = 0; k < g1.cell_count(); ++k)
    w.blocks.push_back(g1.weights[static_cast<std::size_t>(k)] *
                       (g1.blocks[static_cast<std::size_t>(k)] *
                        g2.blocks[static_cast<std::size_t>(k)].adjoint()));
  return w;
}

/// psi'(x_k) = W_k psi(x_k). Pointwise norms are preserved.
inline WaveSection apply_gauge_field(const GaugeField& w, const WaveSection& psi) {
  if (w.cell_count() != static_cast<int>(psi.values.size()))
    throw InputError("field cell count does not match section");
  if (!w.ids.empty() && w.ids != psi.profile.ids)
    throw InputError("field cell ids do not match section");
  WaveSection out;
  out.profile = psi.profile;
  out.values.reserve(psi.values.size());
  for (int k = 0; k < w.cell_count(); ++k) {
    const Matrix& block = w.blocks[static_cast<std::size_t>(k)];
    const Vector& component = psi.values[static_cast<std::size_t>(k)];
    if (block.rows() != block.cols() || block.cols() != component.size())
      throw InputError("field block shape does not match section components");
    out.values.push_back(block * component);
  }
  return out;
}

/// The gauge g' with G'_k = W_k^* G_k, so that extracting (g, g')
/// returns w again.
inline Gauge gauge_from_field(const Gauge& g, const GaugeField& w) {
  if (w.cell_count() != g.cell_count())
    throw IncompatibleError("field cell count does not match gauge");
  if (!w.ids.empty() && w.ids != g.profile.ids)
    throw IncompatibleError("field cell ids do not match gauge");
  for (int k = 0; k < g.cell_count(); ++k)
    if (w.blocks[static_cast<std::size_t>(k)].rows() != g.blocks[static_cast<std::size_t>(k)].rows())
      throw IncompatibleError("field block size does not match spin dimension");
  if (field_unitarity_residual(w) > eps_local)
    throw InputError("field blocks are not unitary");
  Gauge out;
  out.hilbert_dim = g.hilbert_dim;
  out.weights = g.weights;
  out.profile = g.profile;
  out.blocks.reserve(static_cast<std::size_t>(g.cell_count()));
  for (int k = 0; k < g.cell_count(); ++k)
    out.blocks.push_back(w.blocks[static_cast<std::size_t>(k)].adjoint() *
                         g.blocks[static_cast<std::size_t>(k)]);
  return out;
}

/// The basis whose representation map reproduces the gauge: entry for
/// stratum m and component index a is the preimage of the indicator
/// section carrying e_a on D_m, ordered by ascending m then a.
inline LocalONB realize_gauge_as_local_onb(const OperatorManifold& om, const Gauge& g) {
  if (gauge_residual(om, g) > eps_local)
    throw InputError("gauge fails the locality or unitarity identities");
  LocalONB onb;
  for (const auto& [m, stratum] : g.profile.strata) {
    for (int a = 0; a < m; ++a) {
      WaveSection psi;
      psi.profile = g.profile;
      for (int k = 0; k < g.cell_count(); ++k) {
        Vector component = Vector::Zero(g.blocks[static_cast<std::size_t>(k)].rows());
        if (contains(stratum, k)) component[a] = 1.0;
        psi.values.push_back(std::move(component));
      }
      LocalONBEntry entry;
      entry.u = invert_gauge(g, psi);
      entry.support = stratum;
      onb.entries.push_back(std::move(entry));
    }
  }
  return onb;
}

/// Intertwining unitary between two measures on the same cells, when
/// one exists. Absent exactly when the spin dimension profiles differ.
inline std::optional<Matrix> check_isomorphism(const OperatorManifold& om1,
                                               const OperatorManifold& om2) {
  require_well_formed(om1);
  require_well_formed(om2);
  if (om1.hilbert_dim() != om2.hilbert_dim())
    throw IncompatibleError("hilbert dimensions differ");
  if (om1.cell_count() != om2.cell_count())
    throw IncompatibleError("cell counts differ");
  for (int k = 0; k < om1.cell_count(); ++k) {
    const Cell& a = om1.space.cells[static_cast<std::size_t>(k)];
    const Cell& b = om2.space.cells[static_cast<std::size_t>(k)];
    if (a.id != b.id) throw IncompatibleError("cell ids differ at position " + std::to_string(k));
    if (a.weight != b.weight) throw IncompatibleError("cell weights differ at '" + a.id + "'");
  }
  if (spin_dimension_profile(om1) != spin_dimension_profile(om2)) return std::nullopt;
  Gauge g1 = canonical_gauge(om1);
  Gauge g2 = canonical_gauge(om2);
  Matrix u = Matrix::Zero(om1.hilbert_dim(), om1.hilbert_dim());
  for (int k = 0; k < om1.cell_count(); ++k)
    u += g1.weights[static_cast<std::size_t>(k)] *
         (g2.blocks[static_cast<std::size_t>(k)].adjoint() * g1.blocks[static_cast<std::size_t>(k)]);
  return u;
}

/// sum_a |psi^a(x_k)|^2 per cell; unchanged by any unitary field.
inline std::map<std::string, double> gauge_invariant_density(const WaveSection& psi,
                                                             const SpinDimensionProfile& profile) {
  if (psi.profile != profile) throw InputError("section profile does not match");
  if (psi.values.size() != profile.ids.size())
    throw InputError("section cell count does not match profile");
  std::map<std::string, double> density;
  for (std::size_t k = 0; k < profile.ids.size(); ++k) {
    if (static_cast<int>(psi.values[k].size()) != profile.at(profile.ids[k]))
      throw InputError("section component count does not match spin dimension");
    density[profile.ids[k]] = psi.values[k].squaredNorm();
  }
  return density;
}

}  // namespace opman
