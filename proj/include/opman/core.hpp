#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "opman/types.hpp"

namespace opman {

/// Numerical validity of a well-formed manifold. Four named checks:
/// positive weights, orthonormal frame columns, mutually orthogonal
/// cell projections, completeness (ranks sum to N and projections sum
/// to the identity). Residuals are max-abs deviations.
inline ValidationReport validate_operator_manifold(const OperatorManifold& om,
                                                   double tol = eps_valid) {
  require_well_formed(om);
  ValidationReport report;
  const int cell_count = om.cell_count();
  const int big_n = om.hilbert_dim();

  double weight_residual = 0.0;
  for (int k = 0; k < cell_count; ++k) {
    double w = om.weight(k);
    if (!(w > 0.0)) weight_residual = std::max(weight_residual, std::max(1.0, -w));
  }
  report.add("weight_positivity", weight_residual, 0.0);

  double ortho_residual = 0.0;
  for (int k = 0; k < cell_count; ++k) {
    const Matrix& b = om.frame(k);
    if (b.cols() == 0) continue;
    Matrix gram = b.adjoint() * b;
    gram -= Matrix::Identity(b.cols(), b.cols());
    ortho_residual = std::max(ortho_residual, max_abs(gram));
  }
  report.add("frame_orthonormality", ortho_residual, tol);

  double cross_residual = 0.0;
  for (int j = 0; j < cell_count; ++j)
    for (int k = j + 1; k < cell_count; ++k)
      cross_residual = std::max(cross_residual, max_abs(Matrix(om.frame(j).adjoint() * om.frame(k))));
  report.add("cross_cell_orthogonality", cross_residual, tol);

  long rank_sum = 0;
  Matrix total = Matrix::Zero(big_n, big_n);
  for (int k = 0; k < cell_count; ++k) {
    rank_sum += om.frame(k).cols();
    total += om.projection(k);
  }
  total -= Matrix::Identity(big_n, big_n);
  double completeness_residual =
      std::max(static_cast<double>(std::labs(rank_sum - big_n)), max_abs(total));
  report.add("completeness", completeness_residual, tol);

  return report;
}

/// E(Omega) v for a measurable set given as cell indices.
inline Vector apply_spectral_projection(const OperatorManifold& om, const CellSet& region,
                                        const Vector& v) {
  if (v.size() != om.hilbert_dim())
    throw InputError("vector length does not match hilbert dimension");
  Vector out = Vector::Zero(v.size());
  for (int k : region) {
    if (k < 0 || k >= om.cell_count()) throw InputError("cell index out of range");
    out += om.project(k, v);
  }
  return out;
}

/// The operator integral of f against the spectral measure:
/// sum_k f(x_k) P_k, applied to v. With f = coordinate functions this
/// gives the position operators; with f = 1 the identity.
inline Vector apply_functional_calculus(const OperatorManifold& om,
                                        const std::function<Complex(const Cell&)>& f,
                                        const Vector& v) {
  if (v.size() != om.hilbert_dim())
    throw InputError("vector length does not match hilbert dimension");
  Vector out = Vector::Zero(v.size());
  for (int k = 0; k < om.cell_count(); ++k)
    out += f(om.space.cells[static_cast<std::size_t>(k)]) * om.project(k, v);
  return out;
}

/// Dense position operator for one coordinate axis (0-based).
inline Matrix position_operator(const OperatorManifold& om, int axis) {
  if (axis < 0 || axis >= om.dim()) throw InputError("axis out of range");
  const int big_n = om.hilbert_dim();
  Matrix out = Matrix::Zero(big_n, big_n);
  for (int k = 0; k < om.cell_count(); ++k)
    out += om.space.cells[static_cast<std::size_t>(k)].coords[axis] * om.projection(k);
  return out;
}

/// <psi, f(X) psi> for a state psi, computed cellwise.
inline Complex observable_expectation(const OperatorManifold& om,
                                      const std::function<Complex(const Cell&)>& f,
                                      const Vector& psi) {
  if (psi.size() != om.hilbert_dim())
    throw InputError("vector length does not match hilbert dimension");
  Complex out = 0.0;
  for (int k = 0; k < om.cell_count(); ++k)
    out += f(om.space.cells[static_cast<std::size_t>(k)]) * inner(om.project(k, psi), psi);
  return out;
}

}  // namespace opman
