#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "opman/types.hpp"

namespace opman {

/// Counter-based 64-bit generator (splitmix64). The full draw discipline
/// is documented in the README so instances reproduce across languages:
/// uniform doubles take the top 53 bits, Gaussians come from Box-Muller
/// pairs, matrices are filled column by column.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Two independent standard normals from one Box-Muller draw.
  /// The radial draw uses 1 - uniform01() to stay clear of log(0).
  std::pair<double, double> gaussian_pair() {
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(angle), r * std::sin(angle)};
  }

  Complex gaussian_complex() {
    auto [a, b] = gaussian_pair();
    return {a, b};
  }
};

/// Independent complex Gaussian entries, filled column-major.
inline Matrix gaussian_matrix(SplitMix64& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.gaussian_complex();
  return m;
}

inline Vector random_vector(SplitMix64& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.gaussian_complex();
  return v;
}

/// Haar-distributed unitary: Gram-Schmidt on a Gaussian matrix with one
/// reorthogonalization pass. The normalization coefficients are positive
/// reals, which makes the distribution exactly Haar.
inline Matrix haar_unitary(SplitMix64& rng, int n) {
  Matrix g = gaussian_matrix(rng, n, n);
  Matrix q(n, n);
  for (int j = 0; j < n; ++j) {
    Vector v = g.col(j);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) v -= q.col(i) * q.col(i).dot(v);
    q.col(j) = v / v.norm();
  }
  return q;
}

/// Deterministic random instance: per cell a weight in [0.5, 2.0] and
/// three coordinates in [-1, 1], then frames sliced column-wise from one
/// Haar unitary. Draw order: all cells first, then the unitary.
inline OperatorManifold generate_random_manifold(int cell_count, int hilbert_dim,
                                                 const std::vector<int>& ranks,
                                                 std::uint64_t seed) {
  if (cell_count < 1) throw InputError("cell count must be positive");
  if (hilbert_dim < 1) throw InputError("hilbert dimension must be positive");
  if (static_cast<int>(ranks.size()) != cell_count)
    throw InputError("rank list length does not match cell count");
  long sum = 0;
  for (int r : ranks) {
    if (r < 0) throw InputError("ranks must be nonnegative");
    sum += r;
  }
  if (sum != hilbert_dim) throw InputError("ranks must sum to the hilbert dimension");

  SplitMix64 rng(seed);
  OperatorManifold om;
  om.space.dim = 3;
  om.measure.hilbert_dim = hilbert_dim;
  for (int k = 0; k < cell_count; ++k) {
    Cell c;
    c.id = "c" + std::to_string(k);
    c.weight = 0.5 + 1.5 * rng.uniform01();
    c.coords = RealVector(3);
    for (int i = 0; i < 3; ++i) c.coords[i] = 2.0 * rng.uniform01() - 1.0;
    om.space.cells.push_back(std::move(c));
  }
  Matrix u = haar_unitary(rng, hilbert_dim);
  int col = 0;
  for (int k = 0; k < cell_count; ++k) {
    om.measure.frames.push_back(u.middleCols(col, ranks[static_cast<std::size_t>(k)]));
    col += ranks[static_cast<std::size_t>(k)];
  }
  return om;
}

}  // namespace opman
