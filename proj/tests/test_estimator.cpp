#include <doctest.h>

#include <set>

#include "hqc/config.hpp"
#include "hqc/estimator.hpp"
#include "oracles.hpp"

using namespace hqc;

namespace {

PotentialFamily example_family() { return lj_family({1.0, 9.0 / 8.0}, 3); }

ErrorReport with_indicators(std::vector<double> v) {
  ErrorReport r;
  r.per_element_jumps = std::move(v);
  return r;
}

}  // namespace

TEST_CASE("indicator terms: limiting cases") {
  const LatticeGrid g(64, 2);
  const LatticeFn f = oracle::random_zero_mean(g, 4.0);
  const Mesh1D m(g, {5, 17, 30, 63});

  // A single global strain has no jumps; on a periodic mesh that is only u = const.
  const ErrorReport flat = indicator_terms(CoarseFn(m, VectorXd::Constant(4, 0.3)), f, {ForceKind::node_lumped, f});
  CHECK(flat.jump_term == 0.0);
  for (double j : flat.per_element_jumps) CHECK(j == 0.0);

  const ErrorReport exact = indicator_terms(CoarseFn(m), f, {ForceKind::exact_summation, f});
  CHECK(exact.quadrature_term == 0.0);

  const Mesh1D full = Mesh1D::full(g);
  CHECK(indicator_terms(CoarseFn(full), f, {ForceKind::exact_summation, f}).force_term == 0.0);

  const CoarseFn u(m, (VectorXd(4) << 0.0, 1.0, -0.5, 0.25).finished());
  const ErrorReport r = indicator_terms(u, f, {ForceKind::node_lumped, f}, 2.0, 3.0);
  double jmax = 0.0;
  for (Index j = 0; j < 4; ++j) jmax = std::max(jmax, std::abs(u.strain(j) - u.strain((j + 3) % 4)));
  CHECK(r.jump_term == doctest::Approx(jmax).epsilon(1e-15));
  CHECK(r.total == doctest::Approx(2.0 * r.jump_term + 3.0 * r.force_term + r.quadrature_term).epsilon(1e-15));
  CHECK(r.force_term >= 0.0);
  CHECK(r.quadrature_term >= 0.0);
}

TEST_CASE("quadrature term matches the linear program") {
  for (int trial = 0; trial < 50; ++trial) {
    const LatticeGrid g(oracle::uniform_int(4, 24) * 2, 2);
    const Index m = oracle::uniform_int(2, 8);
    std::set<Index> s;
    while (static_cast<Index>(s.size()) < m) s.insert(oracle::uniform_int(0, g.size() - 1));
    const Mesh1D mesh(g, std::vector<Index>(s.begin(), s.end()));
    const LatticeFn f = oracle::random_zero_mean(g, 10.0);
    const ForceFunctional lumped{ForceKind::node_lumped, f};
    // r_j = <F^h, w_j>_h - <f, w_j>_L with w_j the hat function of node j.
    VectorXd r(m);
    for (Index j = 0; j < m; ++j) {
      VectorXd e = VectorXd::Zero(m);
      e[j] = 1.0;
      r[j] = lumped.loads(mesh)[j] - inner(f, CoarseFn(mesh, e).to_lattice());
    }
    const ErrorReport rep = indicator_terms(CoarseFn(mesh), f, lumped);
    CHECK(std::abs(rep.quadrature_term - oracle::lp_coarse_dual(r)) <= 1e-10);
  }
}

TEST_CASE("constants") {
  const PotentialFamily q = quadratic_family({1.5, 4.0}, {0.0, 0.0});
  const Constants cq = estimate_constants(q, ground_microstructure(q));
  CHECK(cq.c11_sampled == doctest::Approx(4.0));
  CHECK(cq.c0_lower == doctest::Approx(0.75));

  const PotentialFamily chain = quadratic_family({1.0}, {0.0});
  const Constants cc = estimate_constants(chain, ground_microstructure(chain));
  CHECK(cc.c11_sampled == doctest::Approx(1.0));
  CHECK(cc.c0_lower == doctest::Approx(0.5));

  const Constants cl = estimate_constants(example_family(), ground_microstructure(example_family()));
  CHECK(cl.c11_sampled > 0.0);
  CHECK(std::isfinite(cl.c11_sampled));
  CHECK(cl.c0_lower > 0.0);

  CHECK_THROWS_AS(estimate_constants(q, ground_microstructure(q), 0.1, -0.1), InvalidArgument);
  CHECK_THROWS_AS(estimate_constants(example_family(), ground_microstructure(example_family()), -3.0, -2.0),
                  InvalidArgument);
}

TEST_CASE("calibration") {
  ErrorReport r;
  r.jump_term = 2.0;
  r.force_term = 0.5;
  r.c0_inv = 2.0;
  r.quadrature_term = 0.25;
  CHECK(fit_calibration(r, 3.25) == doctest::Approx(1.0));
  CHECK(fit_calibration(r, 0.1) == 0.0);
}

TEST_CASE("adaptive marking") {
  const LatticeGrid g(32);
  const Mesh1D m(g, {0, 4, 9, 10, 20});
  SUBCASE("equal indicators, theta = 1") {
    const Mesh1D r = adapt_mesh(m, with_indicators({1, 1, 1, 1, 1}), 1.0);
    // Element [9, 10) is a single site and stays.
    CHECK(r.nodes() == std::vector<Index>{0, 2, 4, 6, 9, 10, 15, 20, 26});
  }
  SUBCASE("dominant indicator, theta = 0.5") {
    const Mesh1D r = adapt_mesh(m, with_indicators({0.1, 5.0, 0.1, 0.2, 0.1}), 0.5);
    CHECK(r.nodes() == std::vector<Index>{0, 4, 6, 9, 10, 20});
  }
  SUBCASE("odd element splits at the lower midpoint site") {
    const Mesh1D r = adapt_mesh(m, with_indicators({0, 1, 0, 0, 0}), 0.5);
    CHECK(r.nodes()[2] == 6);  // [4, 9) has 5 sites; midpoint 6.5 rounds down
  }
  SUBCASE("wrapping element") {
    const Mesh1D r = adapt_mesh(m, with_indicators({0, 0, 0, 0, 1}), 0.5);
    CHECK(r.nodes() == std::vector<Index>{0, 4, 9, 10, 20, 26});
  }
  SUBCASE("full mesh is returned unchanged") {
    const Mesh1D full = Mesh1D::full(LatticeGrid(8));
    CHECK(adapt_mesh(full, with_indicators(std::vector<double>(8, 1.0)), 1.0) == full);
  }
  CHECK_THROWS_AS(adapt_mesh(m, with_indicators({1, 1, 1, 1, 1}), 0.0), InvalidArgument);
  CHECK_THROWS_AS(adapt_mesh(m, with_indicators({1, 1, 1, 1, 1}), 1.5), InvalidArgument);
  CHECK_THROWS_AS(adapt_mesh(m, with_indicators({1, 1}), 0.5), InvalidArgument);
}

TEST_CASE("adaptation reduces the jump indicator") {
  ExperimentConfig cfg;
  cfg.n = 1024;
  const LatticeFn f = make_force_1d(cfg);
  const HomogenizedLaw law(example_family());
  Mesh1D mesh = Mesh1D::uniform(f.grid(), 4);
  double last = kInf;
  for (int step = 0; step < 8; ++step) {
    const ForceFunctional force{ForceKind::exact_summation, f};
    const CoarseSolution c = solve_coarse(law, mesh, force);
    const ErrorReport rep = indicator_terms(c.u, f, force);
    CHECK(rep.jump_term < last);
    last = rep.jump_term;
    const Mesh1D next = adapt_mesh(mesh, rep, 0.5);
    for (Index n : mesh.nodes()) CHECK(next.is_node(n));
    CHECK(next.num_nodes() > mesh.num_nodes());
    mesh = next;
  }
}
