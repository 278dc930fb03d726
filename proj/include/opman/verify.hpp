#pragma once

#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>

#include "opman/core.hpp"
#include "opman/decomposition.hpp"
#include "opman/gauge.hpp"
#include "opman/rng.hpp"
#include "opman/spin_product.hpp"
#include "opman/types.hpp"

namespace opman {

struct VerifyOptions {
  /// When set, replaces every check's threshold.
  std::optional<double> tol;
  /// Seed for the derived random vectors, regions, and fields.
  std::uint64_t seed = 1;
};

namespace verifydetail {

inline CellSet random_region(SplitMix64& rng, int cell_count) {
  CellSet region;
  for (int k = 0; k < cell_count; ++k)
    if (rng.next() & 1) region.push_back(k);
  return region;
}

inline double max_density_gap(const SpinDensity& a, const SpinDensity& b) {
  double gap = 0.0;
  for (const auto& [id, val] : a.values) gap = std::max(gap, std::abs(val - b.at(id)));
  return gap;
}

}  // namespace verifydetail

/// Runs every module's invariants on one instance, with randomized
/// probes drawn deterministically from the seed. If the measure itself
/// is invalid, only the measure checks are reported; everything later
/// depends on them.
inline ValidationReport run_verification_suite(const OperatorManifold& om,
                                               const VerifyOptions& options = {}) {
  using verifydetail::random_region;
  const int cell_count = om.cell_count();
  const int big_n = om.hilbert_dim();
  SplitMix64 rng(options.seed);
  ValidationReport report;
  auto add = [&](const std::string& name, double residual, double threshold) {
    report.add(name, residual, options.tol.value_or(threshold));
  };

  ValidationReport pvm = validate_operator_manifold(om, options.tol.value_or(eps_valid));
  for (const auto& c : pvm.checks) report.add("pvm_" + c.name, c.residual, c.threshold);
  if (!pvm.passed()) return report;

  {
    double idem = 0.0, meet = 0.0, join = 0.0, total = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      CellSet a = random_region(rng, cell_count);
      CellSet b = random_region(rng, cell_count);
      Vector v = random_vector(rng, big_n);
      double scale = std::max(1.0, max_abs(v));
      Vector pa = apply_spectral_projection(om, a, v);
      Vector pb = apply_spectral_projection(om, b, v);
      idem = std::max(idem, max_abs(Vector(apply_spectral_projection(om, a, pa) - pa)) / scale);
      Vector pmeet = apply_spectral_projection(om, set_intersection(a, b), v);
      meet = std::max(meet, max_abs(Vector(apply_spectral_projection(om, a, pb) - pmeet)) / scale);
      Vector pjoin = apply_spectral_projection(om, set_union(a, b), v);
      join = std::max(join, max_abs(Vector(pjoin - (pa + pb - pmeet))) / scale);
      Vector whole = apply_spectral_projection(om, all_cells(om.space), v);
      total = std::max(total, max_abs(Vector(whole - v)) / scale);
    }
    add("projection_idempotence", idem, 1e-12);
    add("projection_intersection", meet, 1e-12);
    add("projection_additivity", join, 1e-12);
    add("projection_total", total, 1e-12);
  }

  {
    auto f = [](const Cell& c) { return Complex(c.coords[0], c.weight); };
    auto g = [](const Cell& c) { return Complex(c.weight, -c.coords[0]); };
    double ident = 0.0, linear = 0.0, product = 0.0, adjoint = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      Vector v = random_vector(rng, big_n);
      Vector u = random_vector(rng, big_n);
      double scale = std::max(1.0, max_abs(v));
      auto one = [](const Cell&) { return Complex(1.0, 0.0); };
      ident = std::max(ident, max_abs(Vector(apply_functional_calculus(om, one, v) - v)) / scale);
      auto fg_sum = [&](const Cell& c) { return f(c) + g(c); };
      Vector lhs = apply_functional_calculus(om, fg_sum, v);
      Vector rhs = apply_functional_calculus(om, f, v) + apply_functional_calculus(om, g, v);
      linear = std::max(linear, max_abs(Vector(lhs - rhs)) / scale);
      auto fg = [&](const Cell& c) { return f(c) * g(c); };
      Vector composed = apply_functional_calculus(om, f, apply_functional_calculus(om, g, v));
      double pscale = std::max(1.0, max_abs(composed));
      product = std::max(
          product, max_abs(Vector(composed - apply_functional_calculus(om, fg, v))) / pscale);
      auto f_conj = [&](const Cell& c) { return std::conj(f(c)); };
      Complex left = inner(apply_functional_calculus(om, f, u), v);
      Complex right = inner(u, apply_functional_calculus(om, f_conj, v));
      adjoint = std::max(adjoint, std::abs(left - right) /
                                      std::max(1.0, std::abs(left)));
    }
    add("calculus_identity", ident, 1e-12);
    add("calculus_linearity", linear, 1e-12);
    add("calculus_product", product, 1e-12);
    add("calculus_adjoint", adjoint, 1e-12);
  }

  {
    double hermitian = 0.0, commutators = 0.0, agreement = 0.0;
    for (int axis = 0; axis < om.dim(); ++axis) {
      Matrix x = position_operator(om, axis);
      hermitian = std::max(hermitian, max_abs(Matrix(x - x.adjoint())));
      Vector v = random_vector(rng, big_n);
      auto coord = [axis](const Cell& c) { return Complex(c.coords[axis], 0.0); };
      agreement = std::max(agreement,
                           max_abs(Vector(x * v - apply_functional_calculus(om, coord, v))) /
                               std::max(1.0, max_abs(v)));
      for (int other = axis + 1; other < om.dim(); ++other) {
        Matrix y = position_operator(om, other);
        commutators = std::max(commutators, max_abs(Matrix(x * y - y * x)));
      }
    }
    add("position_hermitian", hermitian, 1e-12);
    add("position_commutators", commutators, 1e-10);
    add("position_calculus_agreement", agreement, 1e-12);
  }

  {
    double sesqui = 0.0, symmetry = 0.0, schwarz = 0.0, integral = 0.0, additivity = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      Vector u = random_vector(rng, big_n);
      Vector w = random_vector(rng, big_n);
      Vector v = random_vector(rng, big_n);
      Complex alpha = rng.gaussian_complex();
      Complex beta = rng.gaussian_complex();
      auto combo = spin_scalar_product(om, Vector(alpha * u + beta * w), v);
      auto hu = spin_scalar_product(om, u, v);
      auto hw = spin_scalar_product(om, w, v);
      auto flipped = spin_scalar_product(om, v, u);
      auto huu = spin_scalar_product(om, u, u);
      auto hvv = spin_scalar_product(om, v, v);
      double scale = std::max(1.0, u.norm() * v.norm());
      for (const auto& cell : om.space.cells) {
        sesqui = std::max(sesqui, std::abs(combo.at(cell.id) - (alpha * hu.at(cell.id) +
                                                                beta * hw.at(cell.id))) /
                                      scale);
        symmetry = std::max(
            symmetry, std::abs(hu.at(cell.id) - std::conj(flipped.at(cell.id))) / scale);
        double cs = std::norm(hu.at(cell.id)) -
                    huu.at(cell.id).real() * hvv.at(cell.id).real();
        schwarz = std::max(schwarz, cs / std::max(1.0, scale * scale));
      }
      integral = std::max(integral,
                          std::abs(integrate(om, hu, all_cells(om.space)) - inner(u, v)) / scale);
      CellSet a = random_region(rng, cell_count);
      CellSet rest = set_difference(all_cells(om.space), a);
      Complex split = vector_measure(om, u, v, a) + vector_measure(om, u, v, rest);
      additivity = std::max(
          additivity, std::abs(split - vector_measure(om, u, v, all_cells(om.space))) / scale);
    }
    add("spin_sesquilinearity", sesqui, 1e-12);
    add("spin_hermitian_symmetry", symmetry, 1e-12);
    add("spin_cauchy_schwarz", schwarz, 1e-10);
    add("spin_integral", integral, 1e-12);
    add("spin_region_additivity", additivity, 1e-12);
  }

  LocalONB onb = construct_local_onb(om);
  {
    ValidationReport onb_report = verify_local_onb(om, onb, options.tol.value_or(eps_local));
    report.append(onb_report);
    if (!onb_report.passed()) return report;
  }

  {
    auto by_rank = spin_dimension_profile(om);
    auto by_support = spin_dimension_profile(om, onb);
    int disagreements = 0;
    for (const auto& id : by_rank.ids)
      if (by_rank.at(id) != by_support.at(id)) ++disagreements;
    add("strata_rank_agreement", static_cast<double>(disagreements), 0.0);
    LocalONB reseeded = construct_local_onb(om, haar_unitary(rng, big_n));
    add("strata_seed_independence",
        spin_dimension_profile(om, reseeded) == by_rank ? 0.0 : 1.0, 0.0);
  }

  {
    double unitarity = 0.0, intertwining = 0.0, roundtrip = 0.0, completeness = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      Vector v = random_vector(rng, big_n);
      Vector u = random_vector(rng, big_n);
      double scale = std::max(1.0, max_abs(v));
      auto comps = representation_map(om, onb, v);
      double norm_sq = 0.0;
      for (std::size_t l = 0; l < comps.values.size(); ++l)
        for (std::size_t i = 0; i < comps.values[l].size(); ++i)
          norm_sq += std::norm(comps.values[l][i]) *
                     om.weight(onb.entries[l].support[i]);
      unitarity = std::max(unitarity,
                           std::abs(norm_sq - v.squaredNorm()) / std::max(1.0, v.squaredNorm()));
      CellSet region = random_region(rng, cell_count);
      auto projected = representation_map(om, onb, apply_spectral_projection(om, region, v));
      for (std::size_t l = 0; l < comps.values.size(); ++l)
        for (std::size_t i = 0; i < comps.values[l].size(); ++i) {
          Complex expected = contains(region, onb.entries[l].support[i])
                                 ? comps.values[l][i]
                                 : Complex(0.0);
          intertwining =
              std::max(intertwining, std::abs(projected.values[l][i] - expected) / scale);
        }
      Vector back = reconstruct_from_components(om, onb, comps);
      roundtrip = std::max(roundtrip, max_abs(Vector(back - v)) / scale);
      completeness = std::max(completeness, pointwise_completeness_residual(om, onb, u, v) /
                                                std::max(1.0, max_abs(u) * max_abs(v)));
    }
    add("representation_unitarity", unitarity, eps_local);
    add("representation_intertwining", intertwining, eps_local);
    add("representation_roundtrip", roundtrip, eps_local);
    add("pointwise_completeness", completeness, eps_local);
  }

  Gauge g = gauge_from_local_onb(om, onb);
  {
    double locality = 0.0, isometry = 0.0;
    Matrix total = Matrix::Zero(big_n, big_n);
    for (int k = 0; k < cell_count; ++k) {
      const Matrix& block = g.blocks[static_cast<std::size_t>(k)];
      double w = g.weights[static_cast<std::size_t>(k)];
      if (block.rows() > 0)
        locality = std::max(locality, max_abs(Matrix(block - block * om.projection(k))));
      Matrix point = w * (block * block.adjoint());
      point -= Matrix::Identity(block.rows(), block.rows());
      isometry = std::max(isometry, max_abs(point));
      total += w * (block.adjoint() * block);
    }
    add("gauge_locality", locality, eps_local);
    add("gauge_isometry", isometry, eps_local);
    add("gauge_global_unitarity",
        max_abs(Matrix(total - Matrix::Identity(big_n, big_n))), eps_local);
  }

  {
    auto self = extract_gauge_transformation(g, g);
    double identity_gap = 0.0;
    for (const auto& block : self.blocks)
      identity_gap = std::max(
          identity_gap, max_abs(Matrix(block - Matrix::Identity(block.rows(), block.cols()))));
    add("gauge_extraction_identity", identity_gap, eps_local);

    GaugeField field;
    field.ids = g.profile.ids;
    for (int k = 0; k < cell_count; ++k)
      field.blocks.push_back(
          haar_unitary(rng, static_cast<int>(g.blocks[static_cast<std::size_t>(k)].rows())));
    Gauge g2 = gauge_from_field(g, field);
    auto extracted = extract_gauge_transformation(g, g2);
    double recovery = 0.0;
    for (int k = 0; k < cell_count; ++k)
      recovery = std::max(recovery, max_abs(Matrix(extracted.blocks[static_cast<std::size_t>(k)] -
                                                   field.blocks[static_cast<std::size_t>(k)])));
    add("gauge_field_roundtrip", recovery, eps_local);
    add("gauge_field_unitarity", field_unitarity_residual(extracted), eps_local);

    GaugeField second;
    second.ids = g.profile.ids;
    for (int k = 0; k < cell_count; ++k)
      second.blocks.push_back(
          haar_unitary(rng, static_cast<int>(g.blocks[static_cast<std::size_t>(k)].rows())));
    Gauge g3 = gauge_from_field(g2, second);
    auto w12 = extract_gauge_transformation(g, g2);
    auto w23 = extract_gauge_transformation(g2, g3);
    auto w13 = extract_gauge_transformation(g, g3);
    double law = 0.0;
    for (int k = 0; k < cell_count; ++k)
      law = std::max(law, max_abs(Matrix(w12.blocks[static_cast<std::size_t>(k)] *
                                             w23.blocks[static_cast<std::size_t>(k)] -
                                         w13.blocks[static_cast<std::size_t>(k)])));
    add("gauge_group_law", law, eps_local);

    LocalONB realized = realize_gauge_as_local_onb(om, g2);
    add("gauge_realization_verify",
        verify_local_onb(om, realized, options.tol.value_or(eps_local)).max_residual(), eps_local);
    Gauge re_gauge = gauge_from_local_onb(om, realized);
    double action = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      Vector v = random_vector(rng, big_n);
      double scale = std::max(1.0, max_abs(v));
      auto direct = apply_gauge(g2, v);
      auto via_onb = apply_gauge(re_gauge, v);
      for (int k = 0; k < cell_count; ++k)
        action = std::max(action, max_abs(Vector(direct.values[static_cast<std::size_t>(k)] -
                                                 via_onb.values[static_cast<std::size_t>(k)])) /
                                      scale);
    }
    add("gauge_realization_action", action, eps_local);

    double invariance = 0.0, observables = 0.0;
    for (int rep = 0; rep < 2; ++rep) {
      Vector v = random_vector(rng, big_n);
      auto d1 = gauge_invariant_density(apply_gauge(g, v), g.profile);
      auto d2 = gauge_invariant_density(apply_gauge(g2, v), g2.profile);
      double scale = std::max(1.0, v.squaredNorm());
      for (const auto& [id, d] : d1)
        invariance = std::max(invariance, std::abs(d2.at(id) - d) / scale);
      for (int axis = 0; axis < om.dim(); ++axis) {
        auto coord = [axis](const Cell& c) { return Complex(c.coords[axis], 0.0); };
        Complex direct = observable_expectation(om, coord, v);
        double from_density = 0.0;
        for (int k = 0; k < cell_count; ++k) {
          const Cell& c = om.space.cells[static_cast<std::size_t>(k)];
          from_density += c.coords[axis] * c.weight * d1.at(c.id);
        }
        observables = std::max(observables, std::abs(direct - from_density) / scale);
      }
    }
    add("gauge_density_invariance", invariance, eps_local);
    add("gauge_observable_invariance", observables, eps_local);
  }

  {
    auto u = check_isomorphism(om, om);
    double self_residual = 1.0;
    if (u.has_value()) {
      self_residual =
          max_abs(Matrix(*u * u->adjoint() - Matrix::Identity(big_n, big_n)));
      for (int k = 0; k < cell_count; ++k) {
        Matrix p = om.projection(k);
        self_residual = std::max(self_residual, max_abs(Matrix(*u * p - p * *u)));
      }
    }
    add("isomorphism_self", self_residual, eps_local);
  }

  return report;
}

/// One line per check plus a summary, the `verify` output format.
inline std::string format_report(const ValidationReport& report) {
  std::ostringstream out;
  int passed = 0;
  for (const auto& c : report.checks) {
    bool ok = c.residual <= c.threshold;
    if (ok) ++passed;
    out << (ok ? "pass " : "FAIL ") << std::left << std::setw(32) << c.name << " residual "
        << std::scientific << std::setprecision(3) << c.residual << "  threshold " << c.threshold
        << '\n';
  }
  out << (passed == static_cast<int>(report.checks.size()) ? "passed " : "FAILED ") << passed << "/"
      << report.checks.size() << " checks\n";
  return out.str();
}

}  // namespace opman
