#include <doctest.h>

#include <Eigen/Dense>
#include <set>
#include <sstream>

#include "hqc/config.hpp"
#include "hqc/hqc.hpp"
#include "hqc/io.hpp"
#include "oracles.hpp"

using namespace hqc;

namespace {

PotentialFamily example_family() { return lj_family({1.0, 9.0 / 8.0}, 3); }

Mesh1D random_mesh(const LatticeGrid& g, Index min_nodes = 2) {
  const Index m = oracle::uniform_int(min_nodes, std::max(min_nodes, g.size() / 3));
  std::set<Index> s;
  while (static_cast<Index>(s.size()) < m) s.insert(oracle::uniform_int(0, g.size() - 1));
  return Mesh1D(g, std::vector<Index>(s.begin(), s.end()));
}

LatticeFn unit(const LatticeGrid& g, Index i) {
  LatticeFn e(g);
  e[i] = 1.0;
  return e;
}

// Hat function of node j evaluated on the lattice.
LatticeFn hat(const Mesh1D& mesh, Index j) {
  VectorXd nodal = VectorXd::Zero(mesh.num_nodes());
  nodal[j] = 1.0;
  return CoarseFn(mesh, nodal).to_lattice();
}

// P1 finite elements with a constant coefficient, assembled from hat functions.
LatticeFn fe_oracle(const Mesh1D& mesh, double kappa, const LatticeFn& f) {
  const Index m = mesh.num_nodes();
  std::vector<LatticeFn> hats;
  for (Index j = 0; j < m; ++j) hats.push_back(hat(mesh, j));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + 1, m + 1);
  VectorXd rhs = VectorXd::Zero(m + 1);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) a(i, j) = kappa * inner(diff(hats[i]), diff(hats[j]));
    a(i, m) = a(m, i) = mean(hats[i]);
    rhs[i] = inner(f, hats[i]);
  }
  const VectorXd c = a.fullPivLu().solve(rhs);
  LatticeFn u(mesh.grid());
  for (Index j = 0; j < m; ++j) u += c[j] * hats[j];
  return u;
}

}  // namespace

TEST_CASE("mesh invariants") {
  const LatticeGrid g(16, 2);
  CHECK_THROWS_AS(Mesh1D(g, {3}), InvalidArgument);
  CHECK_THROWS_AS(Mesh1D(g, {3, 3}), InvalidArgument);
  CHECK_THROWS_AS(Mesh1D(g, {5, 2}), InvalidArgument);
  CHECK_THROWS_AS(Mesh1D(g, {0, 16}), InvalidArgument);
  CHECK_THROWS_AS(Mesh1D::uniform(g, 3), InvalidArgument);
  const Mesh1D u = Mesh1D::uniform(g, 4);
  CHECK(u.nodes() == std::vector<Index>{3, 7, 11, 15});
  CHECK(u.is_node(15));  // site x = 1
  for (int trial = 0; trial < 20; ++trial) {
    const Mesh1D m = random_mesh(g);
    double total = 0.0;
    for (Index e = 0; e < m.num_elements(); ++e) total += m.h(e);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    const LatticeFn h = m.mesh_size();
    for (Index i = 0; i < g.size(); ++i) CHECK(h[i] == m.h(m.element_of(i)));
  }
  std::stringstream ss;
  write_mesh(ss, u);
  CHECK(ss.str().rfind("# N=16\n", 0) == 0);
  CHECK(read_mesh(ss, 2) == u);
}

TEST_CASE("nodal interpolation") {
  const LatticeGrid g(64);
  const Mesh1D mesh = Mesh1D(g, {3, 20, 41, 50});
  // A function affine on element [20, 41) is reproduced there.
  LatticeFn v = oracle::random_fn(g);
  for (Index i = 20; i <= 41; ++i) v[i] = 0.5 + 0.25 * static_cast<double>(i);
  const LatticeFn iv = interpolate(mesh, v).to_lattice();
  for (Index i = 20; i <= 41; ++i) CHECK(iv[i] == doctest::Approx(v[i]).epsilon(1e-14));

  for (int trial = 0; trial < 100; ++trial) {
    const Mesh1D m = random_mesh(g);
    const LatticeFn w = oracle::random_fn(g, 2.0);
    const CoarseFn c = interpolate(m, w);
    CHECK(interpolate(m, c.to_lattice()).nodal() == c.nodal());
    CHECK(seminorm(c.to_lattice(), 1, 1) <= seminorm(w, 1, 1) * (1 + 1e-13));
    for (Index j = 0; j < m.num_nodes(); ++j) CHECK(c.to_lattice()[m.left(j)] == w[m.left(j)]);
  }
}

TEST_CASE("adjoint of the interpolant") {
  const LatticeGrid g(20);
  const Mesh1D mesh(g, {1, 6, 13});
  // Site 9 lies in [6, 13) with barycentric weight (13 - 9) / 7 at node 6.
  LatticeFn w(g);
  w[9] = 2.5;
  const LatticeFn r = istar(mesh, w);
  CHECK(r[6] == doctest::Approx(2.5 * 4.0 / 7.0).epsilon(1e-15));
  CHECK(r[13] == doctest::Approx(2.5 * 3.0 / 7.0).epsilon(1e-15));
  CHECK(r.values().cwiseAbs().sum() == doctest::Approx(2.5).epsilon(1e-15));
  // Wrapping element [13, 1 + 20).
  const LatticeFn r2 = istar(mesh, unit(g, 17));
  CHECK(r2[13] == doctest::Approx(4.0 / 8.0));
  CHECK(r2[1] == doctest::Approx(4.0 / 8.0));
  CHECK(istar(mesh, unit(g, 6)).values() == unit(g, 6).values());

  for (int trial = 0; trial < 30; ++trial) {
    const LatticeGrid gr(oracle::uniform_int(4, 64));
    const Mesh1D m = random_mesh(gr);
    const LatticeFn wr = oracle::random_fn(gr);
    const LatticeFn iw = istar(m, wr);
    for (Index i = 0; i < gr.size(); ++i) {
      if (!m.is_node(i)) CHECK(iw[i] == 0.0);
      const LatticeFn e = unit(gr, i);
      CHECK(std::abs(inner(iw, e) - inner(wr, interpolate(m, e).to_lattice())) <= 1e-14);
    }
    CHECK(mean(iw) == doctest::Approx(mean(wr)).epsilon(1e-13));
  }
}

TEST_CASE("interpolation error and adjoint bounds") {
  for (int trial = 0; trial < 100; ++trial) {
    const LatticeGrid g(oracle::uniform_int(4, 64));
    const Mesh1D m = random_mesh(g);
    const LatticeFn f = oracle::random_zero_mean(g, 5.0);
    const LatticeFn v = oracle::random_fn(g);
    const LatticeFn h = m.mesh_size();
    LatticeFn hf(g), hmef(g);
    for (Index i = 0; i < g.size(); ++i) {
      hf[i] = h[i] * f[i];
      hmef[i] = (h[i] - g.spacing()) * f[i];
    }
    const LatticeFn fs = istar(m, f);
    CHECK(dual_seminorm_neg1(fs) <= dual_seminorm_neg1(f) * (1 + 1e-12) + 1e-15);
    CHECK(norm(fs) <= static_cast<double>(g.size()) * norm(hf) * (1 + 1e-13));
    CHECK(inner(f, LatticeFn(v - interpolate(m, v).to_lattice())) <= norm(hmef) * seminorm(v, 1, kInf) * (1 + 1e-12) + 1e-13);
  }
}

TEST_CASE("force functionals annihilate constants") {
  const LatticeGrid g(48, 2);
  const LatticeFn f = oracle::random_zero_mean(g, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Mesh1D m = random_mesh(g);
    for (ForceKind kind : {ForceKind::exact_summation, ForceKind::node_lumped}) {
      const ForceFunctional F{kind, f};
      CHECK(std::abs(F.loads(m).sum()) < 1e-13);
      const LatticeFn v = oracle::random_fn(g);
      CHECK(inner(F.as_lattice(m), v) == doctest::Approx(F.loads(m).dot(interpolate(m, v).nodal())).epsilon(1e-12));
    }
    const ForceFunctional exact{ForceKind::exact_summation, f};
    CHECK(norm(LatticeFn(exact.as_lattice(m) - istar(m, f))) < 1e-12);
  }
}

TEST_CASE("coarse dual norm matches the linear program") {
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = oracle::uniform_int(2, 8);
    VectorXd r(m);
    for (Index j = 0; j < m; ++j) r[j] = oracle::uniform(-1, 1);
    r.array() -= r.mean();
    CHECK(std::abs(coarse_dual_norm(r) - oracle::lp_coarse_dual(r)) <= 1e-10);
  }
}

TEST_CASE("coarse solve on the full mesh is the full homogenized solve") {
  ExperimentConfig cfg;
  cfg.n = 256;
  const LatticeFn f = make_force_1d(cfg);
  const HomogenizedLaw law(example_family());
  const CoarseSolution c = solve_coarse(law, Mesh1D::full(f.grid()), {ForceKind::exact_summation, f});
  const EquilibriumSolution h = solve_homogenized_full(law, f.grid(), f);
  CHECK(seminorm(LatticeFn(c.u.to_lattice() - h.u), 1, kInf) <= 1e-9);
  CHECK(c.residual_dual <= 1e-10);
}

TEST_CASE("quadratic coarse solve is the constant-coefficient finite element solution") {
  const double k1 = 1.0, k2 = 3.0;
  const HomogenizedLaw law(quadratic_family({k1, k2}, {0.05, -0.1}));
  for (int trial = 0; trial < 10; ++trial) {
    const LatticeGrid g(40, 2);
    const Mesh1D m = random_mesh(g);
    const LatticeFn f = oracle::random_zero_mean(g, 10.0);
    const CoarseSolution c = solve_coarse(law, m, {ForceKind::exact_summation, f});
    const LatticeFn uc = c.u.to_lattice();
    CHECK(std::abs(mean(uc)) < 1e-13);
    CHECK(norm(LatticeFn(uc - fe_oracle(m, 2 * k1 * k2 / (k1 + k2), f))) < 1e-11);
  }
}

TEST_CASE("coarse solution strain is elementwise constant") {
  ExperimentConfig cfg;
  cfg.n = 256;
  const LatticeFn f = make_force_1d(cfg);
  const Mesh1D m = Mesh1D::uniform(f.grid(), 16);
  const CoarseSolution c = solve_coarse(HomogenizedLaw(example_family()), m, {ForceKind::node_lumped, f});
  const LatticeFn du = diff(c.u.to_lattice());
  for (Index i = 0; i < f.size(); ++i)
    if (!m.is_node(i + 1)) CHECK(std::abs(du.at(i + 1) - du[i]) < 1e-12 * std::max(1.0, std::abs(du[i])));
}

TEST_CASE("corrector") {
  const LatticeGrid g1(32);
  const HomogenizedLaw simple(lj_family({1.0}, 2));
  const LatticeFn u = oracle::random_zero_mean(g1, 0.01);
  CHECK(norm(LatticeFn(corrector(simple, u) - u)) < 1e-15);

  const LatticeGrid g(64, 2);
  const HomogenizedLaw law(example_family());
  const LatticeFn zero_corr = corrector(law, LatticeFn(g));
  const LatticeFn lifted = lift_microstructure(g, ground_microstructure(example_family()).chi_star);
  CHECK(norm(LatticeFn(zero_corr - lifted)) < 1e-14);
  const AtomisticProblem prob(g, example_family(), LatticeFn(g));
  CHECK(norm(energy_grad_hess(prob, zero_corr).gradient) / 64.0 < 1e-12);

  for (int trial = 0; trial < 5; ++trial) {
    const CoarseFn c = interpolate(random_mesh(g), oracle::random_zero_mean(g, 0.0005));
    CHECK(std::abs(mean(corrector(law, c))) < 1e-15);
  }
}

TEST_CASE("equivalence with the full problem driven by the adjoint load") {
  SUBCASE("quadratic family on a random mesh") {
    const LatticeGrid g(64, 2);
    const HomogenizedLaw law(quadratic_family({1.0, 2.5}, {0.0, 0.1}));
    const Mesh1D m = random_mesh(g, 3);
    const LatticeFn f = oracle::random_zero_mean(g, 5.0);
    const EquivalenceReport r = equivalence_check(law, m, {ForceKind::exact_summation, f});
    CHECK(r.max_difference <= 1e-9);
    CHECK(r.max_strain_jump <= 1e-9);
  }
  SUBCASE("full mesh") {
    const LatticeGrid g(32, 2);
    const LatticeFn f = oracle::random_zero_mean(g, 5.0);
    const EquivalenceReport r =
        equivalence_check(HomogenizedLaw(example_family()), Mesh1D::full(g), {ForceKind::exact_summation, f});
    CHECK(r.max_difference <= 1e-12);
  }
  SUBCASE("example family, eight nodes") {
    ExperimentConfig cfg;
    cfg.n = 256;
    const LatticeFn f = make_force_1d(cfg);
    const Mesh1D m = Mesh1D::uniform(f.grid(), 8);
    for (ForceKind kind : {ForceKind::exact_summation, ForceKind::node_lumped}) {
      const EquivalenceReport r = equivalence_check(HomogenizedLaw(example_family()), m, {kind, f});
      CHECK(r.max_difference <= 1e-8);
      CHECK(r.max_strain_jump <= 1e-8);
    }
  }
}

TEST_CASE("coarse function text round trip") {
  const LatticeGrid g(24, 2);
  const Mesh1D m(g, {1, 5, 12, 23});
  const CoarseFn c(m, (VectorXd(4) << 0.1, -1.0 / 3.0, 2e-17, 7.25).finished());
  std::stringstream ss;
  write_coarse_fn(ss, c);
  const CoarseFn d = read_coarse_fn(ss, 2);
  CHECK(d.mesh() == m);
  CHECK(d.nodal() == c.nodal());
}
