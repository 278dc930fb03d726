#pragma once

#include <string>

#include "opman/types.hpp"

namespace opman::instances {

/// K unit-weight cells on a line, one fiber dimension each (N = K).
/// The discrete multiplication-operator picture: spin dimension 1
/// everywhere.
inline OperatorManifold scalar_chain(int cell_count) {
  if (cell_count < 1) throw InputError("cell count must be positive");
  OperatorManifold om;
  om.space.dim = 1;
  om.measure.hilbert_dim = cell_count;
  Matrix eye = Matrix::Identity(cell_count, cell_count);
  for (int k = 0; k < cell_count; ++k) {
    Cell c;
    c.id = "c" + std::to_string(k);
    c.coords = RealVector::Constant(1, static_cast<double>(k));
    c.weight = 1.0;
    om.space.cells.push_back(std::move(c));
    om.measure.frames.push_back(eye.col(k));
  }
  return om;
}

/// K unit-weight cells with two fiber dimensions each (N = 2K): the
/// two-component spinor picture, spin dimension 2 everywhere.
inline OperatorManifold spinor_chain(int cell_count) {
  if (cell_count < 1) throw InputError("cell count must be positive");
  OperatorManifold om;
  om.space.dim = 1;
  om.measure.hilbert_dim = 2 * cell_count;
  Matrix eye = Matrix::Identity(2 * cell_count, 2 * cell_count);
  for (int k = 0; k < cell_count; ++k) {
    Cell c;
    c.id = "c" + std::to_string(k);
    c.coords = RealVector::Constant(1, static_cast<double>(k));
    c.weight = 1.0;
    om.space.cells.push_back(std::move(c));
    om.measure.frames.push_back(eye.middleCols(2 * k, 2));
  }
  return om;
}

}  // namespace opman::instances
