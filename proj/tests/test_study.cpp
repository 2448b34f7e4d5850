#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hqc/study.hpp"
#include "oracles.hpp"

using namespace hqc;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hqc-test-" + name);
  fs::remove_all(p);
  return p;
}

std::vector<StudyRow> power_rows(double order) {
  std::vector<StudyRow> rows;
  for (double h : {0.5, 0.25, 0.125, 0.0625, 0.03125}) {
    StudyRow r;
    r.h_max = h;
    r.err_1inf = 3.0 * std::pow(h, order);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse(
      "# comment\n"
      "problem = 1d\n"
      "lattice.N = 512   \n"
      "potential.l = 1, 1.125\n"
      "potential.R = 2\n"
      "mesh.schedule = 4, 8, 16\n"
      "force_functional = node_lumped\n"
      "solver.tol = 1e-11\n"
      "\n");
  CHECK(c.n == 512);
  CHECK(c.range == 2);
  CHECK(c.schedule == std::vector<Index>{4, 8, 16});
  CHECK(c.force_functional == ForceKind::node_lumped);
  CHECK(c.newton.tol == 1e-11);
  CHECK(c.l == std::vector<double>{1.0, 1.125});

  const ExperimentConfig a = parse("mesh.schedule = adaptive\nmesh.theta = 0.3\nmesh.steps = 4\n");
  CHECK(a.adaptive);
  CHECK(a.theta == 0.3);

  const ExperimentConfig d = parse("problem = 2d\nlattice2d.N = 64\nmesh2d.t = 4, 8\n");
  CHECK(d.force_preset == "bump_2d");
  CHECK(d.force_amplitude == 10.0);

  CHECK_THROWS_AS(parse("lattice.M = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse("lattice.N = four\n"), ConfigError);
  CHECK_THROWS_AS(parse("lattice.N = 4.5\n"), ConfigError);
  CHECK_THROWS_AS(parse("lattice.N\n"), ConfigError);
  CHECK_THROWS_AS(parse("lattice.N = 513\n"), ConfigError);
  CHECK_THROWS_AS(parse("mesh.schedule = 4, 7\nlattice.N = 64\n"), ConfigError);
  CHECK_THROWS_AS(parse("mesh.theta = 0\nmesh.schedule = adaptive\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem = 3d\n"), ConfigError);
  CHECK_THROWS_AS(parse("problem = 2d\nlattice2d.N = 64\nmesh2d.t = 3\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/hqc.conf"), ConfigError);
}

TEST_CASE("reference hash follows the physics, not the output location") {
  const std::string base = "mesh.schedule = 4, 8\n";
  ExperimentConfig a = parse(base + "lattice.N = 256\n");
  ExperimentConfig b = parse(base + "lattice.N = 256\noutput.dir = elsewhere\nmesh.schedule = 4, 16\n");
  ExperimentConfig c = parse(base + "lattice.N = 512\n");
  ExperimentConfig d = parse(base + "lattice.N = 256\nforce.amplitude = 49\n");
  CHECK(reference_hash(a) == reference_hash(b));
  CHECK(reference_hash(a) != reference_hash(c));
  CHECK(reference_hash(a) != reference_hash(d));
}

TEST_CASE("study CSV round trip is exact") {
  std::vector<StudyRow> rows;
  for (int i = 0; i < 20; ++i) {
    StudyRow r;
    r.h_max = std::ldexp(1.0, -i);
    r.dof = 1L << i;
    r.err_1inf = oracle::uniform(0, 1);
    r.err_0inf = oracle::uniform(0, 1e-7);
    r.eta_jump = oracle::uniform(0, 1e3);
    r.eta_force = 1.0 / 3.0;
    r.eta_quad = 0.0;
    r.eta_total = oracle::uniform(0, 1);
    r.newton_iters = i;
    r.wall_ms = oracle::uniform(0, 100);
    rows.push_back(r);
  }
  std::stringstream ss;
  write_csv(ss, rows);
  CHECK(ss.str().rfind("h_max,dof,err_1inf,err_0inf,eta_jump,eta_force,eta_quad,eta_total,newton_iters,wall_ms\n", 0) == 0);
  CHECK(read_csv(ss) == rows);
}

TEST_CASE("slope fitting") {
  CHECK(fit_slope(power_rows(1.0), "err_1inf") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_slope(power_rows(2.0), "err_1inf") == doctest::Approx(2.0).epsilon(1e-12));
  std::vector<StudyRow> two = power_rows(1.0);
  two.resize(2);
  CHECK_THROWS_AS(fit_slope(two, "err_1inf"), InvalidArgument);
  std::vector<StudyRow> bad = power_rows(1.0);
  bad[1].err_1inf = 0.0;
  CHECK_THROWS_AS(fit_slope(bad, "err_1inf"), InvalidArgument);
  CHECK_THROWS_AS(fit_slope(power_rows(1.0), "eta_quad"), InvalidArgument);
}

TEST_CASE("1d study: determinism, exact summation, files") {
  const fs::path dir = scratch("study1d");
  const ExperimentConfig cfg = parse("lattice.N = 256\nmesh.schedule = 4, 8, 16, 32, 256\n");
  const StudyResult r1 = run_study(cfg, {dir.string(), 2, true});
  REQUIRE(r1.rows.size() == 5);
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    const StudyRow& r = r1.rows[i];
    CHECK(r.eta_quad == 0.0);
    CHECK(r.err_1inf >= 0.0);
    CHECK(r.err_0inf >= 0.0);
    CHECK(r.wall_ms == 0.0);
    if (i > 0) CHECK(r.h_max < r1.rows[i - 1].h_max);
  }
  CHECK(r1.rows.back().eta_force == 0.0);
  CHECK(r1.rows.back().dof == 256);
  const std::string csv = slurp(r1.csv_path);
  CHECK(slurp(r1.svg_path).find("<svg") != std::string::npos);
  std::istringstream is(csv);
  CHECK(read_csv(is) == r1.rows);

  // Cached reference, different thread count, and a cold recomputation all agree byte for byte.
  const StudyResult r2 = run_study(cfg, {dir.string(), 1, true});
  CHECK(slurp(r2.csv_path) == csv);
  const fs::path dir2 = scratch("study1d-cold");
  const StudyResult r3 = run_study(cfg, {dir2.string(), 3, false});
  CHECK(slurp(r3.csv_path) == csv);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("1d adaptive study refines") {
  const fs::path dir = scratch("adaptive");
  const ExperimentConfig cfg = parse("lattice.N = 256\nmesh.schedule = adaptive\nmesh.steps = 4\nforce_functional = node_lumped\n");
  const StudyResult r = run_study(cfg, {dir.string(), 1, true});
  REQUIRE(r.rows.size() == 4);
  for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].dof > r.rows[i - 1].dof);
  fs::remove_all(dir);
}

TEST_CASE("1d study refuses a family without nearest-neighbour dominance") {
  const fs::path dir = scratch("unstable");
  const ExperimentConfig cfg = parse("lattice.N = 64\npotential.l = 0.6\nmesh.schedule = 4, 8\n");
  CHECK_THROWS_AS(run_study(cfg, {dir.string(), 1, true}), StabilityFailure);
  fs::remove_all(dir);
}

TEST_CASE("2d study") {
  const fs::path dir = scratch("study2d");
  const ExperimentConfig cfg = parse("problem = 2d\nlattice2d.N = 32\nmesh2d.t = 4, 8, 16\n");
  const StudyResult r = run_study_2d(cfg, {dir.string(), 2, true});
  REQUIRE(r.rows.size() == 3);
  for (const StudyRow& row : r.rows) {
    CHECK(row.err_1inf > 0.0);
    CHECK(row.eta_total == 0.0);
  }
  CHECK(r.rows[2].err_1inf < r.rows[0].err_1inf);
  const std::string csv = slurp(r.csv_path);
  CHECK(slurp(run_study_2d(cfg, {dir.string(), 1, true}).csv_path) == csv);
  fs::remove_all(dir);
}
