#include <doctest.h>

#include "hqc/micro.hpp"
#include "hqc/potentials.hpp"
#include "oracles.hpp"

using namespace hqc;

namespace {

void check_fd_consistency(const PotentialFamily& fam, double zlo, double zhi, int points = 100) {
  for (int k = 0; k < points; ++k) {
    const int r = static_cast<int>(oracle::uniform_int(1, fam.range()));
    const Index y = oracle::uniform_int(0, fam.period() - 1);
    const double z = oracle::uniform(zlo, zhi);
    REQUIRE(fam.admissible(r, z, y));
    const double h = 1e-6 * std::max(1.0, std::abs(z));
    const double fd1 = oracle::central_difference([&](double t) { return fam.eval(r, t, y); }, z, h);
    const double fd2 = oracle::central_difference([&](double t) { return fam.d1(r, t, y); }, z, h);
    CHECK(oracle::rel_err(fam.d1(r, z, y), fd1) < 1e-6);
    CHECK(oracle::rel_err(fam.d2(r, z, y), fd2) < 1e-6);
  }
}

// Two-site cell energy at z = 0 for chi = (c, -c).
double two_site_energy(const PotentialFamily& fam, double c) {
  const MicroFn chi((VectorXd(2) << c, -c).finished());
  double e = 0.0;
  for (Index y = 0; y < 2; ++y)
    for (int r = 1; r <= fam.range(); ++r) e += fam.eval(r, chi.diff(y, r), y);
  return e;
}

}  // namespace

TEST_CASE("Lennard-Jones values") {
  const PotentialFamily lj = lj_family({1.0, 9.0 / 8.0}, 3);
  CHECK(lj.range() == 3);
  CHECK(lj.period() == 2);
  for (Index y = 0; y < 2; ++y) {
    const double l = y == 0 ? 1.0 : 9.0 / 8.0;
    CHECK(lj.eval(1, l - 1.0, y) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(lj.d1(1, l - 1.0, y)) < 1e-12);
    CHECK(lj.eval(1, 0.5 * l - 1.0, y) == doctest::Approx(3968.0).epsilon(1e-13));
  }
  // Residues wrap: species 2 is species 0.
  CHECK(lj.eval(2, 0.01, 2) == lj.eval(2, 0.01, 0));
  CHECK_FALSE(lj.admissible(1, -1.0, 0));
  CHECK_THROWS_AS(lj.eval(1, -1.5, 0), DomainError);
  CHECK_THROWS_AS(lj_family({1.0, 0.0}, 1), InvalidArgument);
  CHECK_THROWS_AS(lj_family({1.0, -2.0}, 1), InvalidArgument);
  CHECK_THROWS_AS(lj_family({1.0}, 0), InvalidArgument);
}

TEST_CASE("derivative consistency by finite differences") {
  check_fd_consistency(lj_family({1.0, 9.0 / 8.0}, 3), -0.25, 0.5);
  check_fd_consistency(lj_family({0.9, 1.0, 1.2}, 2), -0.2, 0.4);
  check_fd_consistency(quadratic_family({1.0, 2.0}, {0.1, -0.1}), -2.0, 2.0);
  check_fd_consistency(harmonic_family({{1.0, 3.0}, {0.2, 0.1}}, {{0.0, 0.1}, {0.0, 0.0}}), -1.0, 1.0);
}

TEST_CASE("quadratic family") {
  const PotentialFamily q = quadratic_family({1.5, 2.0}, {0.3, -0.2});
  CHECK(q.range() == 1);
  CHECK(q.eval(1, 0.3, 0) == 0.0);
  CHECK(q.d1(1, -0.2, 1) == 0.0);
  for (double z : {-5.0, 0.0, 7.0}) CHECK(q.d2(1, z, 1) == 2.0);
  const PotentialFamily h = quadratic_family({1.0, 1.0}, {0.0, 0.0});
  for (double z : {-1.0, 0.25, 3.0}) CHECK(h.eval(1, z, 0) == doctest::Approx(0.5 * z * z));
}

TEST_CASE("ground microstructure against direct minimization") {
  SUBCASE("simple lattice") {
    const Microstructure m = ground_microstructure(lj_family({1.0}, 3));
    CHECK(m.chi_star.period() == 1);
    CHECK(m.chi_star[0] == 0.0);
  }
  SUBCASE("two-site quadratic") {
    const PotentialFamily q = quadratic_family({1.0, 2.0}, {0.1, -0.1});
    const Microstructure m = ground_microstructure(q);
    const double c = oracle::golden_section([&](double t) { return two_site_energy(q, t); }, -1.0, 1.0);
    CHECK(m.chi_star[0] == doctest::Approx(c).epsilon(1e-7));
    CHECK(m.chi_star[1] == doctest::Approx(-c).epsilon(1e-7));
    CHECK(m.residual <= 1e-12);
    // With p = 2, D chi(1) = -D chi(0) = -d and stationarity gives d = (k0 a0 - k1 a1) / (k0 + k1).
    CHECK(m.chi_star.diff(0, 1) == doctest::Approx((1.0 * 0.1 - 2.0 * -0.1) / 3.0).epsilon(1e-12));
  }
  SUBCASE("Lennard-Jones, R = 3") {
    const PotentialFamily lj = lj_family({1.0, 9.0 / 8.0}, 3);
    const Microstructure m = ground_microstructure(lj);
    const double c = oracle::golden_section([&](double t) { return two_site_energy(lj, t); }, -0.2, 0.2);
    CHECK(std::abs(m.chi_star[0] - c) < 1e-7);
    CHECK(m.residual <= 1e-12);
    CHECK(m.ordered);
    CHECK(m.within_bound);
    CHECK(std::abs(m.chi_star.values().mean()) < 1e-15);
  }
}

TEST_CASE("nearest-neighbour dominance margin") {
  const PotentialFamily chain = quadratic_family({1.0}, {0.0});
  CHECK(nn_dominance_margin(chain, ground_microstructure(chain)) == doctest::Approx(0.5));

  const PotentialFamily lj = lj_family({1.0, 9.0 / 8.0}, 3);
  CHECK(nn_dominance_margin(lj, ground_microstructure(lj)) > 0.0);

  const PotentialFamily lj1 = lj_family({1.1}, 3);
  double far = 0.0;
  for (int r = 2; r <= 3; ++r) far += std::abs(lj1.d2(r, 0.0, 0));
  CHECK(nn_dominance_margin(lj1, ground_microstructure(lj1)) == doctest::Approx(0.5 * lj1.d2(1, 0.0, 0) - far).epsilon(1e-14));

  // Second-neighbour curvature at least half the first one breaks dominance.
  const PotentialFamily strong = harmonic_family({{1.0}, {0.6}}, {{0.0}, {0.0}});
  CHECK(nn_dominance_margin(strong, ground_microstructure(strong)) <= 0.0);
}

TEST_CASE("microstructure bound on random valid microstructures") {
  int valid = 0;
  for (int trial = 0; trial < 400 && valid < 50; ++trial) {
    const Index p = oracle::uniform_int(2, 6);
    std::vector<double> k(static_cast<std::size_t>(p)), a(static_cast<std::size_t>(p)), l(static_cast<std::size_t>(p));
    for (Index y = 0; y < p; ++y) {
      k[static_cast<std::size_t>(y)] = oracle::uniform(0.5, 5.0);
      a[static_cast<std::size_t>(y)] = oracle::uniform(-1.5, 1.5);
      l[static_cast<std::size_t>(y)] = oracle::uniform(0.8, 1.3);
    }
    const PotentialFamily fam = trial % 2 ? quadratic_family(k, a) : lj_family(l, 1 + trial % 3);
    try {
      const Microstructure m = ground_microstructure(fam);
      ++valid;
      CHECK(m.within_bound);
      CHECK(m.chi_star.values().cwiseAbs().maxCoeff() <= 0.5 * static_cast<double>(p - 1));
    } catch (const StabilityFailure&) {
      // Not a valid microstructure (atoms out of order); skipped.
    }
  }
  CHECK(valid == 50);
}

TEST_CASE("out-of-order atoms are reported") {
  CHECK_THROWS_AS(ground_microstructure(quadratic_family({1.0, 1.0}, {-1.5, 1.5})), StabilityFailure);
}
