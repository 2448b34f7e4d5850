#include "hqc/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "hqc/micro.hpp"

namespace hqc {

namespace {

class LennardJonesLaw final : public BondLaw {
 public:
  explicit LennardJonesLaw(std::vector<double> l) : l_(std::move(l)) {}

  double energy(int r, double z, Index y) const override {
    const double s = stretch(r, z, y);
    const double s6 = std::pow(s, -6);
    return -2.0 * s6 + s6 * s6;
  }
  double d1(int r, double z, Index y) const override {
    const double s = stretch(r, z, y);
    return r / l_[y] * (12.0 * std::pow(s, -7) - 12.0 * std::pow(s, -13));
  }
  double d2(int r, double z, Index y) const override {
    const double s = stretch(r, z, y);
    const double c = r / l_[y];
    return c * c * (-84.0 * std::pow(s, -8) + 156.0 * std::pow(s, -14));
  }
  bool admissible(int, double z, Index) const override { return 1.0 + z > 0.0; }
  double rest_strain(Index y) const override { return l_[y] - 1.0; }

 private:
  double stretch(int r, double z, Index y) const { return r * (1.0 + z) / l_[y]; }

  std::vector<double> l_;
};

class HarmonicLaw final : public BondLaw {
 public:
  HarmonicLaw(std::vector<std::vector<double>> k, std::vector<std::vector<double>> a)
      : k_(std::move(k)), a_(std::move(a)) {}

  double energy(int r, double z, Index y) const override {
    const double d = z - a_[r - 1][y];
    return 0.5 * k_[r - 1][y] * d * d;
  }
  double d1(int r, double z, Index y) const override { return k_[r - 1][y] * (z - a_[r - 1][y]); }
  double d2(int r, double, Index y) const override { return k_[r - 1][y]; }
  double rest_strain(Index y) const override { return a_[0][y]; }

 private:
  std::vector<std::vector<double>> k_;
  std::vector<std::vector<double>> a_;
};

}  // namespace

PotentialFamily::PotentialFamily(std::shared_ptr<const BondLaw> law, int range, Index period,
                                 std::string name)
    : law_(std::move(law)), range_(range), period_(period), name_(std::move(name)) {
  if (!law_) throw InvalidArgument("PotentialFamily: null law");
  if (range < 1) throw InvalidArgument("PotentialFamily: range must be positive");
  if (period < 1) throw InvalidArgument("PotentialFamily: period must be positive");
}

bool PotentialFamily::admissible(int r, double z, Index y) const {
  return std::isfinite(z) && law_->admissible(r, z, wrap_index(y, period_));
}

void PotentialFamily::check(int r, double z, Index y) const {
  if (r < 1 || r > range_) throw InvalidArgument("PotentialFamily: range index out of bounds");
  if (!admissible(r, z, y))
    throw DomainError(name_ + ": inadmissible strain " + std::to_string(z) + " (r = " +
                          std::to_string(r) + ", y = " + std::to_string(y) + ")",
                      static_cast<long>(y), r);
}

double PotentialFamily::eval(int r, double z, Index y) const {
  check(r, z, y);
  return law_->energy(r, z, wrap_index(y, period_));
}

double PotentialFamily::d1(int r, double z, Index y) const {
  check(r, z, y);
  return law_->d1(r, z, wrap_index(y, period_));
}

double PotentialFamily::d2(int r, double z, Index y) const {
  check(r, z, y);
  return law_->d2(r, z, wrap_index(y, period_));
}

BondValue PotentialFamily::eval_all(int r, double z, Index y) const {
  check(r, z, y);
  const Index yy = wrap_index(y, period_);
  return {law_->energy(r, z, yy), law_->d1(r, z, yy), law_->d2(r, z, yy)};
}

PotentialFamily lj_family(const std::vector<double>& l, int range) {
  if (l.empty()) throw InvalidArgument("lj_family: need at least one species");
  for (double v : l)
    if (!(v > 0.0)) throw InvalidArgument("lj_family: equilibrium distances must be positive");
  if (range < 1) throw InvalidArgument("lj_family: R must be positive");
  return PotentialFamily(std::make_shared<LennardJonesLaw>(l), range,
                         static_cast<Index>(l.size()), "lj");
}

PotentialFamily quadratic_family(const std::vector<double>& k, const std::vector<double>& a) {
  return harmonic_family({k}, {a});
}

PotentialFamily harmonic_family(const std::vector<std::vector<double>>& k,
                                const std::vector<std::vector<double>>& a) {
  if (k.empty() || k.size() != a.size()) throw InvalidArgument("harmonic_family: shape mismatch");
  const std::size_t p = k.front().size();
  if (p == 0) throw InvalidArgument("harmonic_family: need at least one species");
  for (std::size_t r = 0; r < k.size(); ++r) {
    if (k[r].size() != p || a[r].size() != p)
      throw InvalidArgument("harmonic_family: every range needs p stiffnesses and offsets");
  }
  for (double v : k.front())
    if (!(v > 0.0)) throw InvalidArgument("harmonic_family: nearest-neighbour stiffness must be positive");
  return PotentialFamily(std::make_shared<HarmonicLaw>(k, a), static_cast<int>(k.size()),
                         static_cast<Index>(p), k.size() == 1 ? "quadratic" : "harmonic");
}

MicroFn rest_ramp(const PotentialFamily& family) {
  const Index p = family.period();
  VectorXd spacing(p);
  for (Index y = 0; y < p; ++y) spacing[y] = 1.0 + family.rest_strain(y);
  const double total = spacing.sum();
  // D chi(y) = spacing_y * p / total - 1, integrated from residue 0.
  MicroFn chi(p);
  double acc = 0.0;
  for (Index y = 0; y < p; ++y) {
    chi[y] = acc;
    acc += spacing[y] * static_cast<double>(p) / total - 1.0;
  }
  chi.values().array() -= chi.values().mean();
  return chi;
}

Microstructure ground_microstructure(const PotentialFamily& family) {
  return ground_microstructure(family, CellSettings{});
}

Microstructure ground_microstructure(const PotentialFamily& family, const CellSettings& settings) {
  const Index p = family.period();
  Microstructure m;
  const MicroSolution cell = solve_cell_problem(family, 0.0, initial_micro_guess(family), settings);
  m.chi_star = cell.chi;
  m.residual = cell.residual;
  m.iterations = cell.iterations;

  for (Index y = 0; y < p; ++y)
    if (!(1.0 + m.chi_star.diff(y, 1) > 0.0)) m.ordered = false;
  m.within_bound = m.chi_star.values().cwiseAbs().maxCoeff() <= 0.5 * static_cast<double>(p - 1) + 1e-14;
  if (!m.ordered)
    throw StabilityFailure("ground_microstructure: y + chi_*(y) is not strictly increasing");
  return m;
}

double nn_dominance_margin(const PotentialFamily& family, const Microstructure& micro) {
  const Index p = family.period();
  const MicroFn& chi = micro.chi_star;
  double min_nn = kInf;
  for (Index y = 0; y < p; ++y) min_nn = std::min(min_nn, family.d2(1, chi.diff(y, 1), y));
  double far = 0.0;
  for (int r = 2; r <= family.range(); ++r) {
    double worst = 0.0;
    for (Index y = 0; y < p; ++y) worst = std::max(worst, std::abs(family.d2(r, chi.diff(y, r), y)));
    far += worst;
  }
  return 0.5 * min_nn - far;
}

}  // namespace hqc
