#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "opman/instances.hpp"
#include "opman/io.hpp"
#include "opman/rng.hpp"

using namespace opman;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("opman_io_" + std::to_string(rd()) + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void rewrite(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
}

}  // namespace

TEST_CASE("splitmix64 matches the reference outputs") {
  SplitMix64 rng(0);
  REQUIRE(rng.next() == 0xE220A8397B1DCDAFULL);
  REQUIRE(rng.next() == 0x6E789E6AA1B965F4ULL);
  REQUIRE(rng.next() == 0x06C45D188009454FULL);
}

TEST_CASE("uniform draws stay in range and reproduce") {
  SplitMix64 a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    double u = a.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(u == b.uniform01());
  }
}

TEST_CASE("gaussian draws are finite with sane moments") {
  SplitMix64 rng(7);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n / 2; ++i) {
    auto [x, y] = rng.gaussian_pair();
    REQUIRE(std::isfinite(x));
    REQUIRE(std::isfinite(y));
    sum += x + y;
    sum_sq += x * x + y * y;
  }
  REQUIRE(std::abs(sum / n) < 0.05);
  REQUIRE(std::abs(sum_sq / n - 1.0) < 0.05);
}

TEST_CASE("haar unitaries are unitary and deterministic") {
  for (int n : {1, 2, 7, 24}) {
    SplitMix64 rng(99);
    Matrix q = haar_unitary(rng, n);
    REQUIRE(max_abs(Matrix(q.adjoint() * q - Matrix::Identity(n, n))) < 1e-13);
    SplitMix64 rng2(99);
    REQUIRE(max_abs(Matrix(q - haar_unitary(rng2, n))) == 0.0);
  }
}

TEST_CASE("generated manifolds are valid and deterministic") {
  auto om = generate_random_manifold(4, 10, {3, 0, 5, 2}, 1234);
  REQUIRE(om.cell_count() == 4);
  REQUIRE(om.hilbert_dim() == 10);
  REQUIRE(om.dim() == 3);
  REQUIRE(om.space.cells[0].id == "c0");
  for (const auto& c : om.space.cells) {
    REQUIRE(c.weight >= 0.5);
    REQUIRE(c.weight <= 2.0);
    for (int i = 0; i < 3; ++i) {
      REQUIRE(c.coords[i] >= -1.0);
      REQUIRE(c.coords[i] <= 1.0);
    }
  }
  auto report = validate_operator_manifold(om, 1e-10);
  REQUIRE(report.passed());
  REQUIRE(spin_dimension_profile(om).strata.at(0) == CellSet{1});

  auto again = generate_random_manifold(4, 10, {3, 0, 5, 2}, 1234);
  for (int k = 0; k < 4; ++k)
    REQUIRE(max_abs(Matrix(om.frame(k) - again.frame(k))) == 0.0);
}

TEST_CASE("single full-rank cell generation") {
  auto om = generate_random_manifold(1, 6, {6}, 5);
  REQUIRE(validate_operator_manifold(om).passed());
  REQUIRE(spin_dimension_profile(om).at("c0") == 6);
}

TEST_CASE("generation rejects bad rank lists") {
  REQUIRE_THROWS_AS(generate_random_manifold(2, 5, {3, 3}, 1), InputError);
  REQUIRE_THROWS_AS(generate_random_manifold(2, 5, {3}, 1), InputError);
  REQUIRE_THROWS_AS(generate_random_manifold(2, 5, {6, -1}, 1), InputError);
  REQUIRE_THROWS_AS(generate_random_manifold(0, 5, {}, 1), InputError);
}

TEST_CASE("reference chains are valid with the documented profiles") {
  auto scalar = instances::scalar_chain(3);
  REQUIRE(validate_operator_manifold(scalar).passed());
  auto sp = spin_dimension_profile(scalar);
  REQUIRE(sp.strata.size() == 1);
  REQUIRE(sp.strata.at(1) == CellSet{0, 1, 2});

  auto spinor = instances::spinor_chain(2);
  REQUIRE(spinor.hilbert_dim() == 4);
  REQUIRE(validate_operator_manifold(spinor).passed());
  auto pp = spin_dimension_profile(spinor);
  REQUIRE(pp.strata.size() == 1);
  REQUIRE(pp.strata.at(2) == CellSet{0, 1});
}

TEST_CASE("manifold files round-trip exactly") {
  TempDir dir;
  auto om = generate_random_manifold(3, 7, {2, 4, 1}, 777);
  std::string path = dir.file("m.json");
  save_manifold(om, path);
  auto back = load_manifold(path);
  REQUIRE(back.dim() == om.dim());
  REQUIRE(back.hilbert_dim() == om.hilbert_dim());
  for (int k = 0; k < om.cell_count(); ++k) {
    REQUIRE(back.space.cells[static_cast<std::size_t>(k)].id ==
            om.space.cells[static_cast<std::size_t>(k)].id);
    REQUIRE(back.weight(k) == om.weight(k));
    REQUIRE(max_abs(Matrix(back.frame(k) - om.frame(k))) == 0.0);
    REQUIRE((back.space.cells[static_cast<std::size_t>(k)].coords -
             om.space.cells[static_cast<std::size_t>(k)].coords)
                .cwiseAbs()
                .maxCoeff() == 0.0);
  }

  save_manifold(back, dir.file("m2.json"));
  REQUIRE(slurp(dir.file("m2.json")) == slurp(path));
}

TEST_CASE("repeated saves are byte-identical") {
  TempDir dir;
  auto om = generate_random_manifold(2, 5, {2, 3}, 31337);
  save_manifold(om, dir.file("a.json"));
  save_manifold(generate_random_manifold(2, 5, {2, 3}, 31337), dir.file("b.json"));
  REQUIRE(slurp(dir.file("a.json")) == slurp(dir.file("b.json")));
}

TEST_CASE("zero-weight files are rejected") {
  TempDir dir;
  auto om = instances::scalar_chain(2);
  std::string path = dir.file("m.json");
  save_manifold(om, path);
  auto j = nlohmann::json::parse(slurp(path));
  j["cells"][1]["weight"] = 0.0;
  rewrite(path, j);
  REQUIRE_THROWS_MATCHES(load_manifold_unchecked(path), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("weight must be positive")));
}

TEST_CASE("incomplete measures are rejected with the residual") {
  TempDir dir;
  auto om = instances::scalar_chain(2);
  om.measure.frames[1] = Matrix(2, 0);
  std::string path = dir.file("m.json");
  save_manifold(om, path);
  REQUIRE(load_manifold_unchecked(path).hilbert_dim() == 2);
  try {
    load_manifold(path);
    FAIL("expected rejection");
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    REQUIRE(msg.find("completeness") != std::string::npos);
    REQUIRE(msg.find("residual 1") != std::string::npos);
  }
}

TEST_CASE("parse errors carry document paths") {
  TempDir dir;
  std::string path = dir.file("bad.json");

  {
    std::ofstream out(path);
    out << "{ not json";
  }
  REQUIRE_THROWS_AS(load_manifold(path), ParseError);
  REQUIRE_THROWS_AS(load_manifold(dir.file("missing.json")), ParseError);

  auto om = instances::scalar_chain(2);
  save_manifold(om, path);
  auto good = nlohmann::json::parse(slurp(path));

  auto j = good;
  j["format"] = "opman/2";
  rewrite(path, j);
  REQUIRE_THROWS_MATCHES(
      load_manifold(path), ParseError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("/format")));

  j = good;
  j["kind"] = "gauge";
  rewrite(path, j);
  REQUIRE_THROWS_AS(load_manifold(path), ParseError);

  j = good;
  j["cells"][0].erase("coords");
  rewrite(path, j);
  REQUIRE_THROWS_MATCHES(
      load_manifold(path), ParseError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("/cells/0/coords")));

  j = good;
  j["cells"][1]["frame"][0] = nlohmann::json::array({1.0});
  rewrite(path, j);
  REQUIRE_THROWS_MATCHES(
      load_manifold(path), ParseError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("/cells/1/frame")));

  j = good;
  j["cells"][1]["id"] = "c0";
  rewrite(path, j);
  REQUIRE_THROWS_MATCHES(
      load_manifold(path), ParseError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("duplicate cell id")));

  j = good;
  j["hilbert_dim"] = 2.5;
  rewrite(path, j);
  REQUIRE_THROWS_AS(load_manifold(path), ParseError);
}

TEST_CASE("gauge files round-trip") {
  TempDir dir;
  auto om = generate_random_manifold(3, 8, {2, 4, 2}, 4242);
  auto g = canonical_gauge(om);
  std::string path = dir.file("g.json");
  save_gauge(g, path);
  auto back = load_gauge(path);
  REQUIRE(back.hilbert_dim == g.hilbert_dim);
  REQUIRE(back.profile == g.profile);
  REQUIRE(back.weights == g.weights);
  for (int k = 0; k < g.cell_count(); ++k)
    REQUIRE(max_abs(Matrix(back.blocks[static_cast<std::size_t>(k)] -
                           g.blocks[static_cast<std::size_t>(k)])) == 0.0);

  save_gauge(back, dir.file("g2.json"));
  REQUIRE(slurp(dir.file("g2.json")) == slurp(path));
}

TEST_CASE("gauge files with inconsistent profiles are rejected") {
  TempDir dir;
  auto g = canonical_gauge(instances::scalar_chain(2));
  std::string path = dir.file("g.json");
  save_gauge(g, path);
  auto good = nlohmann::json::parse(slurp(path));

  auto j = good;
  j["profile"]["c9"] = 1;
  rewrite(path, j);
  REQUIRE_THROWS_MATCHES(
      load_gauge(path), ParseError,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("unknown cell id")));

  j = good;
  j["profile"].erase("c1");
  rewrite(path, j);
  REQUIRE_THROWS_AS(load_gauge(path), ParseError);

  j = good;
  j["profile"]["c1"] = 2;  // block row count no longer matches
  rewrite(path, j);
  REQUIRE_THROWS_AS(load_gauge(path), ParseError);
}

TEST_CASE("section files round-trip") {
  TempDir dir;
  auto om = generate_random_manifold(3, 6, {1, 3, 2}, 88);
  auto g = canonical_gauge(om);
  SplitMix64 rng(5);
  auto psi = apply_gauge(g, random_vector(rng, 6));
  std::string path = dir.file("s.json");
  save_section(psi, path);
  auto back = load_section(path);
  REQUIRE(back.profile == psi.profile);
  for (std::size_t k = 0; k < psi.values.size(); ++k)
    REQUIRE(max_abs(Vector(back.values[k] - psi.values[k])) == 0.0);
}

TEST_CASE("field files round-trip including empty blocks") {
  TempDir dir;
  auto om = generate_random_manifold(3, 5, {2, 0, 3}, 11);
  auto g = canonical_gauge(om);
  GaugeField w;
  w.ids = g.profile.ids;
  SplitMix64 rng(6);
  for (int k = 0; k < g.cell_count(); ++k)
    w.blocks.push_back(haar_unitary(rng, static_cast<int>(g.blocks[static_cast<std::size_t>(k)].rows())));
  std::string path = dir.file("f.json");
  save_field(w, path);
  auto back = load_field(path);
  REQUIRE(back.ids == w.ids);
  for (int k = 0; k < w.cell_count(); ++k) {
    REQUIRE(back.blocks[static_cast<std::size_t>(k)].rows() ==
            w.blocks[static_cast<std::size_t>(k)].rows());
    REQUIRE(max_abs(Matrix(back.blocks[static_cast<std::size_t>(k)] -
                           w.blocks[static_cast<std::size_t>(k)])) == 0.0);
  }
}

TEST_CASE("saving non-finite values is rejected") {
  TempDir dir;
  auto om = instances::scalar_chain(2);
  om.space.cells[0].weight = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(save_manifold(om, dir.file("m.json")), InputError);
}
