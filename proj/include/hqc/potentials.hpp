#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hqc/lattice.hpp"

namespace hqc {

/// Interaction law Phi_r(z; y) of an r-th neighbour bond starting at an atom of
/// species y, as a function of the bond strain z. Implementations receive y
/// already reduced modulo the period.
class BondLaw {
 public:
  virtual ~BondLaw() = default;

  virtual double energy(int r, double z, Index y) const = 0;
  virtual double d1(int r, double z, Index y) const = 0;
  virtual double d2(int r, double z, Index y) const = 0;
  virtual bool admissible(int /*r*/, double /*z*/, Index /*y*/) const { return true; }
  /// Nearest-neighbour strain at which species y is unstressed; seeds cell solves.
  virtual double rest_strain(Index /*y*/) const { return 0.0; }
};

struct BondValue {
  double energy;
  double d1;
  double d2;
};

/// R-neighbour, p-periodic family of interaction laws.
class PotentialFamily {
 public:
  PotentialFamily(std::shared_ptr<const BondLaw> law, int range, Index period, std::string name);

  int range() const { return range_; }
  Index period() const { return period_; }
  const std::string& name() const { return name_; }

  bool admissible(int r, double z, Index y) const;

  // The evaluators throw DomainError outside the admissible set.
  double eval(int r, double z, Index y) const;
  double d1(int r, double z, Index y) const;
  double d2(int r, double z, Index y) const;
  BondValue eval_all(int r, double z, Index y) const;

  double rest_strain(Index y) const { return law_->rest_strain(wrap_index(y, period_)); }

 private:
  void check(int r, double z, Index y) const;

  std::shared_ptr<const BondLaw> law_;
  int range_;
  Index period_;
  std::string name_;
};

/// Lennard-Jones family -2 s^-6 + s^-12 with s = r (1 + z) / l_y, i.e. the
/// deformed bond length in units of eps relative to the species distance l_y.
/// Admissible iff 1 + z > 0.
PotentialFamily lj_family(const std::vector<double>& l, int range);

/// Phi_1(z; y) = k_y (z - a_y)^2 / 2, R = 1.
PotentialFamily quadratic_family(const std::vector<double>& k, const std::vector<double>& a);

/// Harmonic laws for every range: Phi_r(z; y) = k[r-1][y] (z - a[r-1][y])^2 / 2.
PotentialFamily harmonic_family(const std::vector<std::vector<double>>& k,
                                const std::vector<std::vector<double>>& a);

/// Relaxed unloaded microstructure chi_* with its diagnostics.
struct Microstructure {
  MicroFn chi_star;
  double residual = 0.0;
  int iterations = 0;
  /// y + chi_*(y) strictly increasing.
  bool ordered = true;
  /// ||chi_*||_inf <= (p - 1) / 2.
  bool within_bound = true;
};

struct CellSettings;

/// Solves the unloaded cell problem (z = 0). Throws SolverFailure when Newton
/// stalls and StabilityFailure when the atoms are not ordered.
Microstructure ground_microstructure(const PotentialFamily& family);
Microstructure ground_microstructure(const PotentialFamily& family, const CellSettings& settings);

/// 1/2 min_y d2Phi_1(D_{y,1} chi_*) - sum_{r>=2} max_y |d2Phi_r(D_{y,r} chi_*)|.
double nn_dominance_margin(const PotentialFamily& family, const Microstructure& micro);

/// Zero-mean ramp whose nearest-neighbour strains sit at the species rest strains.
MicroFn rest_ramp(const PotentialFamily& family);

}  // namespace hqc
