#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hqc/banded.hpp"
#include "hqc/micro.hpp"
#include "hqc/potentials.hpp"

namespace hqc {

struct NewtonSettings {
  double tol = 1e-10;
  int max_iter = 100;
  int damping_max = 30;
  /// Workers for per-site homogenized law evaluations.
  int threads = 1;
};

struct NewtonStep {
  int iter;
  double residual_dual;
  double damping;
};

struct EquilibriumSolution {
  LatticeFn u;
  double residual_dual = 0.0;
  int iterations = 0;
  std::vector<NewtonStep> trace;
};

/// E, its L-gradient (<g, v>_L = dE(u) v) and the Hessian in the same pairing.
struct LatticeSystem {
  double energy;
  LatticeFn gradient;
  PeriodicBandMatrix hessian;
};

/// Atomistic chain with p-periodic species under a zero-mean external force.
class AtomisticProblem {
 public:
  AtomisticProblem(LatticeGrid grid, PotentialFamily family, LatticeFn force);

  const LatticeGrid& grid() const { return grid_; }
  const PotentialFamily& family() const { return family_; }
  const LatticeFn& force() const { return force_; }

 private:
  LatticeGrid grid_;
  PotentialFamily family_;
  LatticeFn force_;
};

/// Removes the mean of a user force; returns the projected force and the constant removed.
std::pair<LatticeFn, double> make_zero_mean_force(const LatticeFn& f);

/// E(u) = < sum_r Phi^eps_r(D_r u) >_L with gradient and banded Hessian (half-width R).
/// Throws DomainError naming the site and range of the first inadmissible bond.
LatticeSystem energy_grad_hess(const AtomisticProblem& prob, const LatticeFn& u);

/// Damped Newton for <dE(u), v> = <rhs, v> over zero-mean u.
EquilibriumSolution solve_atomistic(const AtomisticProblem& prob, const LatticeFn& rhs,
                                    const LatticeFn& u_init, const NewtonSettings& settings = {});
EquilibriumSolution solve_atomistic(const AtomisticProblem& prob, const LatticeFn& u_init,
                                    const NewtonSettings& settings = {});

/// I_#(eps chi^eps) for a p-periodic micro function.
LatticeFn lift_microstructure(const LatticeGrid& grid, const MicroFn& chi);

/// E0(u) = < Phi0(D u) >_L assembled through the homogenized law.
LatticeSystem homogenized_energy_grad_hess(const HomogenizedLaw& law, const LatticeFn& u, int threads = 1);

/// Full-lattice homogenized problem <dPhi0(D u0), D v> = <f, v>.
EquilibriumSolution solve_homogenized_full(const HomogenizedLaw& law, const LatticeGrid& grid,
                                           const LatticeFn& f, const NewtonSettings& settings = {},
                                           const std::optional<LatticeFn>& u_init = std::nullopt);

/// -D[dPhi0(D u0)] - T f, the strong-form residual of the homogenized problem.
LatticeFn homogenized_strong_residual(const HomogenizedLaw& law, const LatticeFn& u0, const LatticeFn& f);

}  // namespace hqc
