#pragma once

// Cell problem and the homogenized interaction law
//
//   Phi0(z) = sum_r < Phi_r(z + D_{y,r} chi(z)) >_P,
//
// where chi(z) is the zero-mean micro relaxation at macroscopic strain z.

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>

#include "hqc/potentials.hpp"

namespace hqc {

struct CellSettings {
  double tol = 1e-12;
  int max_iter = 50;
  int damping_max = 30;
};

struct MicroSolution {
  double z = 0.0;
  MicroFn chi;
  double residual = 0.0;
  int iterations = 0;
};

/// Energy, gradient and Hessian of sum_y sum_r Phi_r(z + D_{y,r} chi(y); y)
/// with respect to the p micro values, plus d(gradient)/dz.
struct CellSystem {
  double energy = 0.0;
  VectorXd gradient;
  Eigen::MatrixXd hessian;
  VectorXd gradient_z;
};

CellSystem assemble_cell(const PotentialFamily& family, double z, const MicroFn& chi);

/// Damped Newton on the zero-mean micro space (chi at residue 0 eliminated).
MicroSolution solve_cell_problem(const PotentialFamily& family, double z, const MicroFn& start,
                                 const CellSettings& settings);

/// Starting point for a cell solve when nothing better is known: zero if
/// admissible, otherwise rest_ramp.
MicroFn initial_micro_guess(const PotentialFamily& family);

struct HomogenizedValue {
  double phi0;
  double dphi0;
  double d2phi0;
};

/// Phi0 and its first two derivatives evaluated on the fly, with a
/// thread-safe cache of cell solutions that seeds nearby strains.
class HomogenizedLaw {
 public:
  explicit HomogenizedLaw(PotentialFamily family, CellSettings settings = {});
  HomogenizedLaw(const HomogenizedLaw& other);
  HomogenizedLaw& operator=(const HomogenizedLaw&) = delete;

  const PotentialFamily& family() const { return family_; }
  const CellSettings& settings() const { return settings_; }
  Index period() const { return family_.period(); }

  MicroSolution solve_cell(double z, const std::optional<MicroFn>& warm_start = std::nullopt) const;
  HomogenizedValue eval(double z) const;
  /// eval() from a given cell solution, no cache traffic.
  HomogenizedValue eval(const MicroSolution& cell) const;

  void clear_cache();
  std::size_t cache_size() const;

 private:
  static std::int64_t key(double z);

  PotentialFamily family_;
  CellSettings settings_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::int64_t, MicroSolution> cache_;
};

inline MicroSolution solve_cell(const HomogenizedLaw& law, double z,
                                const std::optional<MicroFn>& warm_start = std::nullopt) {
  return law.solve_cell(z, warm_start);
}

inline HomogenizedValue homogenized_eval(const HomogenizedLaw& law, double z) { return law.eval(z); }

}  // namespace hqc
