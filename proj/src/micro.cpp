#include "hqc/micro.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <mutex>

namespace hqc {

namespace {

// chi = B xi with xi = chi[1..p-1] and chi[0] = -sum(xi).
VectorXd expand(const VectorXd& xi) {
  VectorXd chi(xi.size() + 1);
  chi[0] = -xi.sum();
  chi.tail(xi.size()) = xi;
  return chi;
}

VectorXd reduce(const VectorXd& g) { return g.tail(g.size() - 1).array() - g[0]; }

Eigen::MatrixXd reduce(const Eigen::MatrixXd& h) {
  const Index m = h.rows() - 1;
  Eigen::MatrixXd out(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) out(i, j) = h(i + 1, j + 1) - h(i + 1, 0) - h(0, j + 1) + h(0, 0);
  return out;
}

}  // namespace

CellSystem assemble_cell(const PotentialFamily& family, double z, const MicroFn& chi) {
  const Index p = family.period();
  if (chi.period() != p) throw InvalidArgument("assemble_cell: micro function period mismatch");
  CellSystem s;
  s.gradient = VectorXd::Zero(p);
  s.gradient_z = VectorXd::Zero(p);
  s.hessian = Eigen::MatrixXd::Zero(p, p);
  for (Index y = 0; y < p; ++y) {
    for (int r = 1; r <= family.range(); ++r) {
      const BondValue b = family.eval_all(r, z + chi.diff(y, r), y);
      s.energy += b.energy;
      const Index yr = wrap_index(y + r, p);
      if (yr == y) continue;
      const double c = 1.0 / r;
      s.gradient[yr] += c * b.d1;
      s.gradient[y] -= c * b.d1;
      s.gradient_z[yr] += c * b.d2;
      s.gradient_z[y] -= c * b.d2;
      const double k = c * c * b.d2;
      s.hessian(yr, yr) += k;
      s.hessian(y, y) += k;
      s.hessian(yr, y) -= k;
      s.hessian(y, yr) -= k;
    }
  }
  return s;
}

MicroFn initial_micro_guess(const PotentialFamily& family) {
  MicroFn zero(family.period());
  for (Index y = 0; y < family.period(); ++y)
    for (int r = 1; r <= family.range(); ++r)
      if (!family.admissible(r, 0.0, y)) return rest_ramp(family);
  return zero;
}

MicroSolution solve_cell_problem(const PotentialFamily& family, double z, const MicroFn& start,
                                 const CellSettings& settings) {
  const Index p = family.period();
  MicroSolution sol;
  sol.z = z;
  sol.chi = MicroFn(p);
  if (p == 1) {
    // The zero-mean space is trivial; still check the bonds exist.
    for (int r = 1; r <= family.range(); ++r) (void)family.eval(r, z, 0);
    return sol;
  }
  if (start.period() != p) throw InvalidArgument("solve_cell_problem: warm start period mismatch");

  VectorXd xi = start.values().tail(p - 1).array() - start.values().mean();
  MicroFn chi(expand(xi));
  CellSystem sys = assemble_cell(family, z, chi);
  double res = sys.gradient.cwiseAbs().maxCoeff();

  for (int it = 0; it < settings.max_iter; ++it) {
    if (res <= settings.tol) break;
    Eigen::LLT<Eigen::MatrixXd> llt(reduce(sys.hessian));
    if (llt.info() != Eigen::Success)
      throw StabilityFailure("solve_cell: cell Hessian not positive definite at z = " + std::to_string(z));
    const VectorXd step = -llt.solve(reduce(sys.gradient));

    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= settings.damping_max; ++h, t *= 0.5) {
      try {
        MicroFn trial(expand(xi + t * step));
        CellSystem trial_sys = assemble_cell(family, z, trial);
        const double trial_res = trial_sys.gradient.cwiseAbs().maxCoeff();
        if (trial_res <= res) {
          xi += t * step;
          chi = std::move(trial);
          sys = std::move(trial_sys);
          res = trial_res;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
    }
    ++sol.iterations;
    if (!accepted) throw DomainError("solve_cell: damping exhausted at z = " + std::to_string(z));
  }
  if (!(res <= settings.tol))
    throw SolverFailure("solve_cell: no convergence at z = " + std::to_string(z) +
                        ", residual " + std::to_string(res));

  // Snap to a 2^-30 grid and take a fixed number of full Newton steps. The
  // converged iterate then no longer depends on the warm start (unless it sits
  // on a grid boundary), so cached and cold evaluations agree bit for bit.
  try {
    VectorXd xc = xi.unaryExpr([](double v) { return std::ldexp(std::nearbyint(std::ldexp(v, 30)), -30); });
    for (int k = 0; k < 3; ++k) {
      const CellSystem s = assemble_cell(family, z, MicroFn(expand(xc)));
      Eigen::LLT<Eigen::MatrixXd> llt(reduce(s.hessian));
      if (llt.info() != Eigen::Success) throw StabilityFailure("solve_cell: singular cell Hessian");
      xc -= llt.solve(reduce(s.gradient));
    }
    MicroFn canon(expand(xc));
    const double canon_res = assemble_cell(family, z, canon).gradient.cwiseAbs().maxCoeff();
    if (canon_res <= settings.tol) {
      chi = std::move(canon);
      res = canon_res;
    }
  } catch (const std::exception&) {
  }
  sol.chi = chi;
  sol.residual = res;
  return sol;
}

HomogenizedLaw::HomogenizedLaw(PotentialFamily family, CellSettings settings)
    : family_(std::move(family)), settings_(settings) {}

HomogenizedLaw::HomogenizedLaw(const HomogenizedLaw& other)
    : family_(other.family_), settings_(other.settings_) {
  std::shared_lock lock(other.mutex_);
  cache_ = other.cache_;
}

std::int64_t HomogenizedLaw::key(double z) { return std::llround(z * 1e12); }

MicroSolution HomogenizedLaw::solve_cell(double z, const std::optional<MicroFn>& warm_start) const {
  if (!std::isfinite(z)) throw DomainError("solve_cell: non-finite strain");
  std::optional<MicroFn> seed = warm_start;
  const std::int64_t k = key(z);
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(k);
    if (it != cache_.end() && it->second.z == z) return it->second;
    if (!seed && !cache_.empty()) {
      auto hi = cache_.lower_bound(k);
      auto best = cache_.end();
      if (hi != cache_.end()) best = hi;
      if (hi != cache_.begin()) {
        auto lo = std::prev(hi);
        if (best == cache_.end() || std::abs(lo->second.z - z) <= std::abs(best->second.z - z)) best = lo;
      }
      seed = best->second.chi;
    }
  }
  if (!seed) seed = initial_micro_guess(family_);

  MicroSolution sol;
  try {
    sol = solve_cell_problem(family_, z, *seed, settings_);
  } catch (const std::exception&) {
    // Far warm starts can fail where a cold start succeeds.
    const MicroFn cold = initial_micro_guess(family_);
    if (seed->values() == cold.values()) throw;
    sol = solve_cell_problem(family_, z, cold, settings_);
  }
  {
    std::unique_lock lock(mutex_);
    cache_.try_emplace(k, sol);
  }
  return sol;
}

HomogenizedValue HomogenizedLaw::eval(double z) const { return eval(solve_cell(z)); }

HomogenizedValue HomogenizedLaw::eval(const MicroSolution& cell) const {
  const Index p = family_.period();
  const double z = cell.z;
  const MicroFn& chi = cell.chi;

  MicroFn dchi(p);
  if (p > 1) {
    const CellSystem sys = assemble_cell(family_, z, chi);
    Eigen::LLT<Eigen::MatrixXd> llt(reduce(sys.hessian));
    if (llt.info() != Eigen::Success)
      throw StabilityFailure("homogenized_eval: linearized cell problem is singular at z = " +
                             std::to_string(z));
    dchi = MicroFn(expand(-llt.solve(reduce(sys.gradient_z))));
  }

  HomogenizedValue v{0.0, 0.0, 0.0};
  for (Index y = 0; y < p; ++y) {
    for (int r = 1; r <= family_.range(); ++r) {
      const BondValue b = family_.eval_all(r, z + chi.diff(y, r), y);
      v.phi0 += b.energy;
      v.dphi0 += b.d1;
      v.d2phi0 += b.d2 * (1.0 + dchi.diff(y, r));
    }
  }
  const double inv_p = 1.0 / static_cast<double>(p);
  v.phi0 *= inv_p;
  v.dphi0 *= inv_p;
  v.d2phi0 *= inv_p;
  return v;
}

void HomogenizedLaw::clear_cache() {
  std::unique_lock lock(mutex_);
  cache_.clear();
}

std::size_t HomogenizedLaw::cache_size() const {
  std::shared_lock lock(mutex_);
  return cache_.size();
}

}  // namespace hqc
