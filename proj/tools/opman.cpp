// opman: inspect, decompose, and compare finite operator manifolds
// stored as opman/1 JSON files. Exit codes: 0 success or checks passed,
// 1 checks failed, 2 usage, parse, or input errors.

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opman/decomposition.hpp"
#include "opman/gauge.hpp"
#include "opman/instances.hpp"
#include "opman/io.hpp"
#include "opman/rng.hpp"
#include "opman/verify.hpp"

namespace {

struct Usage {
  std::string message;
};

int fail_check(const std::string& message) {
  std::cerr << "check-failed: " << message << '\n';
  return 1;
}

int report_and_exit(const opman::ValidationReport& report) {
  std::cout << opman::format_report(report);
  if (const auto* fail = report.first_failure()) {
    std::ostringstream msg;
    msg << fail->name << " residual " << fail->residual << " exceeds threshold " << fail->threshold;
    return fail_check(msg.str());
  }
  return 0;
}

int run_validate(const std::string& file, double tol) {
  auto om = opman::load_manifold_unchecked(file);
  return report_and_exit(opman::validate_operator_manifold(om, tol));
}

int run_decompose(const std::string& file, const std::string& seed_basis, const std::string& out) {
  auto om = opman::load_manifold(file);
  opman::Matrix seed;
  if (seed_basis == "standard") {
    seed = opman::Matrix::Identity(om.hilbert_dim(), om.hilbert_dim());
  } else if (seed_basis.rfind("random:", 0) == 0) {
    std::uint64_t value = 0;
    try {
      std::size_t end = 0;
      value = std::stoull(seed_basis.substr(7), &end);
      if (end != seed_basis.size() - 7) throw Usage{""};
    } catch (...) {
      throw Usage{"--seed-basis expects 'standard' or 'random:<seed>'"};
    }
    opman::SplitMix64 rng(value);
    seed = opman::haar_unitary(rng, om.hilbert_dim());
  } else {
    throw Usage{"--seed-basis expects 'standard' or 'random:<seed>'"};
  }
  auto onb = opman::construct_local_onb(om, seed);
  opman::save_gauge(opman::gauge_from_local_onb(om, onb), out);
  return 0;
}

int run_classify(const std::string& file) {
  auto om = opman::load_manifold(file);
  auto profile = opman::spin_dimension_profile(om);
  for (const auto& [m, stratum] : profile.strata) {
    std::cout << "D_" << m << ":";
    for (int k : stratum) std::cout << ' ' << profile.ids[static_cast<std::size_t>(k)];
    std::cout << '\n';
  }
  return 0;
}

int run_gauge_diff(const std::string& first, const std::string& second, const std::string& out) {
  auto g1 = opman::load_gauge(first);
  auto g2 = opman::load_gauge(second);
  auto field = opman::extract_gauge_transformation(g1, g2);
  double residual = opman::field_unitarity_residual(field);
  if (residual > opman::eps_local) {
    std::ostringstream msg;
    msg << "extracted field is not unitary (residual " << residual << ")";
    return fail_check(msg.str());
  }
  opman::save_field(field, out);
  return 0;
}

int run_apply_field(const std::string& field_file, const std::string& section_file,
                    const std::string& out) {
  auto field = opman::load_field(field_file);
  auto psi = opman::load_section(section_file);
  opman::save_section(opman::apply_gauge_field(field, psi), out);
  return 0;
}

int run_iso_check(const std::string& first, const std::string& second) {
  auto om1 = opman::load_manifold(first);
  auto om2 = opman::load_manifold(second);
  auto u = opman::check_isomorphism(om1, om2);
  if (!u.has_value()) {
    auto p1 = opman::spin_dimension_profile(om1);
    auto p2 = opman::spin_dimension_profile(om2);
    std::string where = p1.ids.empty() ? "?" : p1.ids.front();
    for (const auto& id : p1.ids)
      if (p1.at(id) != p2.at(id)) {
        where = id;
        break;
      }
    std::cerr << "not isomorphic: spin dimension differs at " << where << '\n';
    return 1;
  }
  std::cout << "isomorphic\n";
  return 0;
}

int run_verify(const std::string& file, const std::optional<double>& tol, std::uint64_t seed) {
  opman::VerifyOptions options;
  options.tol = tol;
  options.seed = seed;
  auto om = opman::load_manifold_unchecked(file);
  return report_and_exit(opman::run_verification_suite(om, options));
}

int run_random(int cells, int dim, const std::vector<int>& ranks, std::uint64_t seed,
               const std::string& out) {
  opman::save_manifold(opman::generate_random_manifold(cells, dim, ranks, seed), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inspect, decompose, and compare finite operator manifolds."};
  app.require_subcommand(1);

  std::string validate_file;
  double validate_tol = opman::eps_valid;
  auto* validate = app.add_subcommand("validate", "Check the measure axioms of a manifold file");
  validate->add_option("manifold", validate_file, "manifold file")->required();
  validate->add_option("--tol", validate_tol, "residual tolerance");

  std::string decompose_file, decompose_out, decompose_seed = "standard";
  auto* decompose =
      app.add_subcommand("decompose", "Build a local basis and save its gauge");
  decompose->add_option("manifold", decompose_file, "manifold file")->required();
  decompose->add_option("--out", decompose_out, "output gauge file")->required();
  decompose->add_option("--seed-basis", decompose_seed, "'standard' or 'random:<seed>'");

  std::string classify_file;
  auto* classify = app.add_subcommand("classify", "Print the spin-dimension strata");
  classify->add_option("manifold", classify_file, "manifold file")->required();

  std::string diff_first, diff_second, diff_out;
  auto* diff = app.add_subcommand("gauge-diff",
                                  "Extract the pointwise unitaries between two gauges");
  diff->add_option("gauge1", diff_first, "first gauge file")->required();
  diff->add_option("gauge2", diff_second, "second gauge file")->required();
  diff->add_option("--out", diff_out, "output field file")->required();

  std::string apply_field_file, apply_section_file, apply_out;
  auto* apply = app.add_subcommand("apply-field", "Apply a unitary field to a wave section");
  apply->add_option("field", apply_field_file, "field file")->required();
  apply->add_option("section", apply_section_file, "section file")->required();
  apply->add_option("--out", apply_out, "output section file")->required();

  std::string iso_first, iso_second;
  auto* iso = app.add_subcommand("iso-check", "Decide isomorphism over the same cells");
  iso->add_option("manifold1", iso_first, "first manifold file")->required();
  iso->add_option("manifold2", iso_second, "second manifold file")->required();

  std::string verify_file;
  std::optional<double> verify_tol;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Run the full invariant suite");
  verify->add_option("manifold", verify_file, "manifold file")->required();
  verify->add_option("--tol", verify_tol, "uniform tolerance override");
  verify->add_option("--seed", verify_seed, "seed for the randomized checks");

  int random_cells = 0, random_dim = 0;
  std::vector<int> random_ranks;
  std::uint64_t random_seed = 0;
  std::string random_out;
  auto* random = app.add_subcommand("random", "Generate a seeded random instance");
  random->add_option("--cells", random_cells, "number of cells")->required();
  random->add_option("--dim", random_dim, "Hilbert space dimension")->required();
  random->add_option("--ranks", random_ranks, "comma-separated cell ranks")
      ->required()
      ->delimiter(',');
  random->add_option("--seed", random_seed, "generator seed")->required();
  random->add_option("--out", random_out, "output manifold file")->required();

  auto* help = app.add_subcommand("help", "Show this message");
  help->callback([&app] {
    std::cout << app.get_formatter()->make_help(&app, "", CLI::AppFormatMode::Normal);
    throw CLI::Success();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::Success&) {
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*validate) return run_validate(validate_file, validate_tol);
    if (*decompose) return run_decompose(decompose_file, decompose_seed, decompose_out);
    if (*classify) return run_classify(classify_file);
    if (*diff) return run_gauge_diff(diff_first, diff_second, diff_out);
    if (*apply) return run_apply_field(apply_field_file, apply_section_file, apply_out);
    if (*iso) return run_iso_check(iso_first, iso_second);
    if (*verify) return run_verify(verify_file, verify_tol, verify_seed);
    if (*random) return run_random(random_cells, random_dim, random_ranks, random_seed, random_out);
    std::cerr << "usage: a subcommand is required, see 'opman help'\n";
    return 2;
  } catch (const Usage& u) {
    std::cerr << "usage: " << u.message << '\n';
    return 2;
  } catch (const opman::ParseError& e) {
    std::cerr << "parse-error: " << e.what() << '\n';
    return 2;
  } catch (const opman::ValidationError& e) {
    std::cerr << "invalid-manifold: " << e.what() << '\n';
    return 2;
  } catch (const opman::IncompatibleError& e) {
    std::cerr << "incompatible: " << e.what() << '\n';
    return 2;
  } catch (const opman::InputError& e) {
    std::cerr << "input-error: " << e.what() << '\n';
    return 2;
  } catch (const opman::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
