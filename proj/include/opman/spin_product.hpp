#pragma once

#include <map>
#include <string>

#include "opman/types.hpp"

namespace opman {

/// Pointwise density of the complex measure V -> <E(V)u, v> with respect
/// to the cell weights. Defined on every cell; densities are per unit
/// weight.
struct SpinDensity {
  std::map<std::string, Complex> values;

  Complex at(const std::string& id) const {
    auto it = values.find(id);
    if (it == values.end()) throw InputError("unknown cell id '" + id + "'");
    return it->second;
  }
};

/// <E(region) u, v>, summed cellwise. Linear in u, anti-linear in v.
inline Complex vector_measure(const OperatorManifold& om, const Vector& u, const Vector& v,
                              const CellSet& region) {
  if (u.size() != om.hilbert_dim() || v.size() != om.hilbert_dim())
    throw InputError("vector length does not match hilbert dimension");
  Complex out = 0.0;
  for (int k : region) {
    if (k < 0 || k >= om.cell_count()) throw InputError("cell index out of range");
    const Matrix& b = om.frame(k);
    if (b.cols() == 0) continue;
    out += inner(Vector(b.adjoint() * u), Vector(b.adjoint() * v));
  }
  return out;
}

/// h_uv(x_k) = <P_k u, v> / mu_k. Integrating against the weights
/// recovers <u, v>. For u = v the density is clamped to the real
/// nonnegative axis (residuals there are pure rounding).
inline SpinDensity spin_scalar_product(const OperatorManifold& om, const Vector& u,
                                       const Vector& v) {
  if (u.size() != om.hilbert_dim() || v.size() != om.hilbert_dim())
    throw InputError("vector length does not match hilbert dimension");
  const bool diagonal = u.size() == v.size() && u == v;
  SpinDensity density;
  for (int k = 0; k < om.cell_count(); ++k) {
    const Matrix& b = om.frame(k);
    Complex h = 0.0;
    if (b.cols() > 0) h = inner(Vector(b.adjoint() * u), Vector(b.adjoint() * v)) / om.weight(k);
    if (diagonal) h = Complex(std::max(h.real(), 0.0), 0.0);
    density.values[om.space.cells[static_cast<std::size_t>(k)].id] = h;
  }
  return density;
}

/// Integral of a density over a region: sum of value times weight.
inline Complex integrate(const OperatorManifold& om, const SpinDensity& density,
                         const CellSet& region) {
  Complex out = 0.0;
  for (int k : region) {
    if (k < 0 || k >= om.cell_count()) throw InputError("cell index out of range");
    out += density.at(om.space.cells[static_cast<std::size_t>(k)].id) * om.weight(k);
  }
  return out;
}

}  // namespace opman
