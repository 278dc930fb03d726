#pragma once

// Test-side builders kept deliberately independent of the library's own
// random-instance generator: dense assembly, stdlib RNG, QR instead of
// Gram-Schmidt. Agreement between the two paths is what the tests check.

#include <numeric>
#include <random>
#include <vector>

#include "opman/types.hpp"

namespace testutil {

using opman::Cell;
using opman::CellSet;
using opman::Complex;
using opman::Matrix;
using opman::MeasureSpace;
using opman::OperatorManifold;
using opman::RealVector;
using opman::SpectralMeasure;
using opman::Vector;

inline Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(gauss(rng), gauss(rng));
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(gauss(rng), gauss(rng));
  return m;
}

/// Unitary via QR of a Gaussian matrix, phases fixed so R has a positive
/// diagonal.
inline Matrix random_unitary(std::mt19937_64& rng, int n) {
  Matrix g = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    Complex d = r(j, j);
    double a = std::abs(d);
    if (a > 0) q.col(j) *= d / a;
  }
  return q;
}

/// Split total into `parts` nonnegative integers uniformly (stars and bars).
inline std::vector<int> random_ranks(std::mt19937_64& rng, int total, int parts) {
  std::vector<int> bars(parts - 1);
  std::uniform_int_distribution<int> pick(0, total);
  for (auto& b : bars) b = pick(rng);
  std::sort(bars.begin(), bars.end());
  std::vector<int> out(parts);
  int prev = 0;
  for (int i = 0; i < parts - 1; ++i) {
    out[i] = bars[static_cast<std::size_t>(i)] - prev;
    prev = bars[static_cast<std::size_t>(i)];
  }
  out[parts - 1] = total - prev;
  return out;
}

/// Independent instance builder: cells with random positive weights and
/// coordinates, frames sliced from a QR unitary.
inline OperatorManifold random_manifold(std::mt19937_64& rng, int cell_count, int big_n,
                                        std::vector<int> ranks = {}) {
  if (ranks.empty()) ranks = random_ranks(rng, big_n, cell_count);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  OperatorManifold om;
  om.space.dim = 2;
  om.measure.hilbert_dim = big_n;
  Matrix u = random_unitary(rng, big_n);
  int col = 0;
  for (int k = 0; k < cell_count; ++k) {
    Cell c;
    c.id = "t" + std::to_string(k);
    c.coords = RealVector(2);
    c.coords << 2.0 * unif(rng) - 1.0, 2.0 * unif(rng) - 1.0;
    c.weight = 0.25 + unif(rng);
    om.space.cells.push_back(c);
    om.measure.frames.push_back(u.middleCols(col, ranks[static_cast<std::size_t>(k)]));
    col += ranks[static_cast<std::size_t>(k)];
  }
  return om;
}

inline CellSet random_region(std::mt19937_64& rng, int cell_count) {
  std::uniform_int_distribution<int> coin(0, 1);
  CellSet s;
  for (int k = 0; k < cell_count; ++k)
    if (coin(rng)) s.push_back(k);
  return s;
}

/// Dense E(region) assembled the slow way, as an oracle.
inline Matrix dense_projection(const OperatorManifold& om, const CellSet& region) {
  Matrix out = Matrix::Zero(om.hilbert_dim(), om.hilbert_dim());
  for (int k : region) out += om.projection(k);
  return out;
}

}  // namespace testutil
