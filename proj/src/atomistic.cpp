#include "hqc/atomistic.hpp"

#include <cmath>
#include <string>

#include "hqc/parallel.hpp"

namespace hqc {

namespace {

/// Damped Newton on the zero-mean subspace for any assembler u -> LatticeSystem.
template <typename Assemble>
EquilibriumSolution newton_zero_mean(Assemble&& assemble, const LatticeFn& rhs, const LatticeFn& u_init,
                                     const NewtonSettings& settings, const char* who) {
  EquilibriumSolution sol;
  sol.u = project_zero_mean(u_init);
  const LatticeFn f = project_zero_mean(rhs);

  LatticeSystem sys = assemble(sol.u);
  double res = dual_seminorm_neg1(project_zero_mean(sys.gradient - f));
  sol.trace.push_back({0, res, 0.0});
  std::vector<double> history{res};

  bool polished = false;
  for (int it = 1; it <= settings.max_iter; ++it) {
    if (res <= settings.tol) {
      if (polished) break;
      polished = true;
    }
    // Rank-one shift on the last unknown removes the constant null mode
    // while keeping the periodic band; the step itself is unaffected because
    // the right-hand side has zero mean.
    PeriodicBandMatrix h = sys.hessian;
    const Index n = h.size();
    h.add(n - 1, n - 1, h.to_dense().diagonal().mean());
    const PeriodicBandSolver solver(h);
    LatticeFn step(sol.u.grid(), solver.solve(-(project_zero_mean(sys.gradient - f)).values()));
    step = project_zero_mean(step);

    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k <= settings.damping_max; ++k, t *= 0.5) {
      try {
        LatticeFn trial = project_zero_mean(sol.u + t * step);
        LatticeSystem trial_sys = assemble(trial);
        const double trial_res = dual_seminorm_neg1(project_zero_mean(trial_sys.gradient - f));
        if (trial_res <= res || (polished && trial_res <= settings.tol)) {
          sol.u = std::move(trial);
          sys = std::move(trial_sys);
          res = trial_res;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
    }
    sol.iterations = it;
    if (!accepted) {
      if (res <= settings.tol) break;
      throw SolverFailure(std::string(who) + ": line search failed, residual " + std::to_string(res),
                          history);
    }
    sol.trace.push_back({it, res, t});
    history.push_back(res);
  }
  if (!(res <= settings.tol))
    throw SolverFailure(std::string(who) + ": no convergence after " + std::to_string(settings.max_iter) +
                            " iterations, residual " + std::to_string(res),
                        history);
  sol.residual_dual = res;
  return sol;
}

}  // namespace

AtomisticProblem::AtomisticProblem(LatticeGrid grid, PotentialFamily family, LatticeFn force)
    : grid_(grid), family_(std::move(family)), force_(std::move(force)) {
  if (!(force_.grid() == grid_)) throw InvalidArgument("AtomisticProblem: force lives on another grid");
  if (grid_.size() % family_.period() != 0)
    throw InvalidArgument("AtomisticProblem: N is not a multiple of the potential period");
  if (std::abs(mean(force_)) > 1e-12 * std::max(1.0, norm(force_)))
    throw InvalidArgument("AtomisticProblem: force must have zero mean");
}

std::pair<LatticeFn, double> make_zero_mean_force(const LatticeFn& f) {
  const double m = mean(f);
  return {project_zero_mean(f), m};
}

LatticeSystem energy_grad_hess(const AtomisticProblem& prob, const LatticeFn& u) {
  const LatticeGrid& grid = prob.grid();
  const PotentialFamily& fam = prob.family();
  const Index n = grid.size();
  const double big_n = static_cast<double>(n);
  const int range = fam.range();

  LatticeSystem s{0.0, LatticeFn(grid), PeriodicBandMatrix(n, std::min<Index>(range, n / 2))};
  for (Index i = 0; i < n; ++i) {
    const Index y = grid.species(i);
    for (int r = 1; r <= range; ++r) {
      const double c = big_n / r;
      const double z = (u.at(i + r) - u[i]) * c;
      if (!fam.admissible(r, z, y))
        throw DomainError("energy_grad_hess: inadmissible bond at site " + std::to_string(i + 1) +
                              ", r = " + std::to_string(r),
                          static_cast<long>(i + 1), r);
      const BondValue b = fam.eval_all(r, z, y);
      const Index j = grid.wrap(i + r);
      s.energy += b.energy;
      s.gradient[j] += c * b.d1;
      s.gradient[i] -= c * b.d1;
      if (j == i) continue;
      const double k = c * c * b.d2;
      s.hessian.add(i, i, k);
      s.hessian.add(j, j, k);
      s.hessian.add(i, j, -k);
      s.hessian.add(j, i, -k);
    }
  }
  s.energy /= big_n;
  return s;
}

EquilibriumSolution solve_atomistic(const AtomisticProblem& prob, const LatticeFn& rhs,
                                    const LatticeFn& u_init, const NewtonSettings& settings) {
  rhs.check_same_grid(prob.force());
  if (std::abs(mean(rhs)) > 1e-10 * std::max(1.0, norm(rhs)))
    throw InvalidArgument("solve_atomistic: right-hand side must have zero mean");
  return newton_zero_mean([&](const LatticeFn& u) { return energy_grad_hess(prob, u); }, rhs, u_init,
                          settings, "solve_atomistic");
}

EquilibriumSolution solve_atomistic(const AtomisticProblem& prob, const LatticeFn& u_init,
                                    const NewtonSettings& settings) {
  return solve_atomistic(prob, prob.force(), u_init, settings);
}

LatticeFn lift_microstructure(const LatticeGrid& grid, const MicroFn& chi) {
  if (grid.period() % chi.period() != 0 && chi.period() != grid.period())
    throw InvalidArgument("lift_microstructure: period mismatch");
  LatticeFn u(grid);
  for (Index i = 0; i < grid.size(); ++i) u[i] = grid.spacing() * chi.at(i + 1);
  return project_zero_mean(u);
}

LatticeSystem homogenized_energy_grad_hess(const HomogenizedLaw& law, const LatticeFn& u, int threads) {
  const LatticeGrid& grid = u.grid();
  const Index n = grid.size();
  const double big_n = static_cast<double>(n);
  const LatticeFn strain = diff(u, 1);

  std::vector<HomogenizedValue> vals(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](Index i) { vals[static_cast<std::size_t>(i)] = law.eval(strain[i]); });

  LatticeSystem s{0.0, LatticeFn(grid), PeriodicBandMatrix(n, 1)};
  for (Index i = 0; i < n; ++i) {
    const HomogenizedValue& v = vals[static_cast<std::size_t>(i)];
    const Index j = grid.wrap(i + 1);
    s.energy += v.phi0;
    s.gradient[j] += big_n * v.dphi0;
    s.gradient[i] -= big_n * v.dphi0;
    const double k = big_n * big_n * v.d2phi0;
    s.hessian.add(i, i, k);
    s.hessian.add(j, j, k);
    s.hessian.add(i, j, -k);
    s.hessian.add(j, i, -k);
  }
  s.energy /= big_n;
  return s;
}

EquilibriumSolution solve_homogenized_full(const HomogenizedLaw& law, const LatticeGrid& grid,
                                           const LatticeFn& f, const NewtonSettings& settings,
                                           const std::optional<LatticeFn>& u_init) {
  if (!(f.grid() == grid)) throw InvalidArgument("solve_homogenized_full: force lives on another grid");
  if (std::abs(mean(f)) > 1e-10 * std::max(1.0, norm(f)))
    throw InvalidArgument("solve_homogenized_full: force must have zero mean");
  const LatticeFn start = u_init ? *u_init : LatticeFn(grid);
  return newton_zero_mean(
      [&](const LatticeFn& u) { return homogenized_energy_grad_hess(law, u, settings.threads); }, f, start,
      settings, "solve_homogenized_full");
}

LatticeFn homogenized_strong_residual(const HomogenizedLaw& law, const LatticeFn& u0, const LatticeFn& f) {
  const LatticeFn strain = diff(u0, 1);
  LatticeFn stress(u0.grid());
  for (Index i = 0; i < u0.size(); ++i) stress[i] = law.eval(strain[i]).dphi0;
  return -1.0 * diff(stress, 1) - translate(f, 1);
}

}  // namespace hqc
