#include "hqc/hqc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hqc/parallel.hpp"

namespace hqc {

Mesh1D::Mesh1D(LatticeGrid grid, std::vector<Index> nodes) : grid_(grid), nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw InvalidArgument("Mesh1D: need at least two nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i] < 0 || nodes_[i] >= grid_.size()) throw InvalidArgument("Mesh1D: node is not a lattice site");
    if (i > 0 && nodes_[i] <= nodes_[i - 1]) throw InvalidArgument("Mesh1D: nodes must be strictly increasing");
  }
}

Mesh1D Mesh1D::uniform(const LatticeGrid& grid, Index nodes) {
  if (nodes < 2 || grid.size() % nodes != 0)
    throw InvalidArgument("Mesh1D::uniform: node count must divide N and be at least 2");
  const Index step = grid.size() / nodes;
  std::vector<Index> list;
  for (Index k = 1; k <= nodes; ++k) list.push_back(k * step - 1);
  return Mesh1D(grid, std::move(list));
}

Index Mesh1D::right(Index e) const {
  return e + 1 < num_nodes() ? nodes_[static_cast<std::size_t>(e + 1)] : nodes_.front() + grid_.size();
}

double Mesh1D::h_max() const {
  Index m = 0;
  for (Index e = 0; e < num_elements(); ++e) m = std::max(m, sites(e));
  return static_cast<double>(m) * grid_.spacing();
}

bool Mesh1D::is_node(Index site) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), grid_.wrap(site));
}

Index Mesh1D::element_of(Index site) const {
  const Index s = grid_.wrap(site);
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
  if (it == nodes_.begin()) return num_elements() - 1;
  return static_cast<Index>(it - nodes_.begin()) - 1;
}

LatticeFn Mesh1D::mesh_size() const {
  LatticeFn h(grid_);
  for (Index e = 0; e < num_elements(); ++e)
    for (Index k = left(e); k < right(e); ++k) h[grid_.wrap(k)] = this->h(e);
  return h;
}

CoarseFn::CoarseFn(Mesh1D mesh) : mesh_(std::move(mesh)), nodal_(VectorXd::Zero(mesh_.num_nodes())) {}

CoarseFn::CoarseFn(Mesh1D mesh, VectorXd nodal) : mesh_(std::move(mesh)), nodal_(std::move(nodal)) {
  if (nodal_.size() != mesh_.num_nodes()) throw InvalidArgument("CoarseFn: one value per node required");
}

double CoarseFn::strain(Index e) const {
  const Index m = mesh_.num_nodes();
  return (nodal_[(e + 1) % m] - nodal_[e]) / mesh_.h(e);
}

LatticeFn CoarseFn::to_lattice() const {
  const LatticeGrid& grid = mesh_.grid();
  const Index m = mesh_.num_nodes();
  LatticeFn u(grid);
  for (Index e = 0; e < m; ++e) {
    const Index n = mesh_.sites(e);
    const double a = nodal_[e], b = nodal_[(e + 1) % m];
    for (Index k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(n);
      u[grid.wrap(mesh_.left(e) + k)] = (1.0 - t) * a + t * b;
    }
  }
  return u;
}

CoarseFn interpolate(const Mesh1D& mesh, const LatticeFn& v) {
  if (!(v.grid() == mesh.grid())) throw InvalidArgument("interpolate: grid mismatch");
  VectorXd nodal(mesh.num_nodes());
  for (Index j = 0; j < mesh.num_nodes(); ++j) nodal[j] = v[mesh.left(j)];
  return CoarseFn(mesh, std::move(nodal));
}

LatticeFn istar(const Mesh1D& mesh, const LatticeFn& w) {
  const LatticeGrid& grid = mesh.grid();
  if (!(w.grid() == grid)) throw InvalidArgument("istar: grid mismatch");
  LatticeFn out(grid);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Index n = mesh.sites(e);
    const Index a = mesh.left(e), b = grid.wrap(mesh.right(e));
    for (Index k = 0; k < n; ++k) {
      const double lambda = static_cast<double>(n - k) / static_cast<double>(n);
      const double wk = w[grid.wrap(a + k)];
      out[a] += lambda * wk;
      if (k > 0) out[b] += (1.0 - lambda) * wk;
    }
  }
  return out;
}

VectorXd ForceFunctional::loads(const Mesh1D& mesh) const {
  if (!(f.grid() == mesh.grid())) throw InvalidArgument("ForceFunctional: grid mismatch");
  const Index m = mesh.num_nodes();
  VectorXd b(m);
  if (kind == ForceKind::exact_summation) {
    const LatticeFn r = istar(mesh, f);
    for (Index j = 0; j < m; ++j) b[j] = r[mesh.left(j)] / static_cast<double>(f.size());
    return b;
  }
  // Trapezoidal weights at the nodes, with the weighted mean removed so
  // that constants are annihilated.
  VectorXd omega(m), fv(m);
  for (Index j = 0; j < m; ++j) {
    omega[j] = 0.5 * (mesh.h((j + m - 1) % m) + mesh.h(j));
    fv[j] = f[mesh.left(j)];
  }
  const double fbar = omega.dot(fv) / omega.sum();
  b = omega.array() * (fv.array() - fbar);
  return b;
}

LatticeFn ForceFunctional::as_lattice(const Mesh1D& mesh) const {
  const VectorXd b = loads(mesh);
  LatticeFn r(mesh.grid());
  for (Index j = 0; j < mesh.num_nodes(); ++j) r[mesh.left(j)] = b[j] * static_cast<double>(f.size());
  return r;
}

double coarse_dual_norm(const VectorXd& nodal_residual) { return primitive_half_range(nodal_residual); }

namespace {

// Weights with mean(to_lattice(U)) = weights . U.
VectorXd mean_weights(const Mesh1D& mesh) {
  const Index m = mesh.num_nodes();
  const double inv_n = mesh.grid().spacing();
  VectorXd w = VectorXd::Zero(m);
  for (Index e = 0; e < m; ++e) {
    const double n = static_cast<double>(mesh.sites(e));
    w[e] += 0.5 * (n + 1.0) * inv_n;
    w[(e + 1) % m] += 0.5 * (n - 1.0) * inv_n;
  }
  return w;
}

struct CoarseSystem {
  VectorXd gradient;
  PeriodicBandMatrix hessian;
};

CoarseSystem assemble_coarse(const HomogenizedLaw& law, const CoarseFn& u, int threads) {
  const Mesh1D& mesh = u.mesh();
  const Index m = mesh.num_nodes();
  std::vector<HomogenizedValue> vals(static_cast<std::size_t>(m));
  parallel_for(m, threads, [&](Index e) { vals[static_cast<std::size_t>(e)] = law.eval(u.strain(e)); });

  CoarseSystem s{VectorXd::Zero(m), PeriodicBandMatrix(m, 1)};
  for (Index e = 0; e < m; ++e) {
    const HomogenizedValue& v = vals[static_cast<std::size_t>(e)];
    const Index a = e, b = (e + 1) % m;
    s.gradient[b] += v.dphi0;
    s.gradient[a] -= v.dphi0;
    const double k = v.d2phi0 / mesh.h(e);
    s.hessian.add(a, a, k);
    s.hessian.add(b, b, k);
    s.hessian.add(a, b, -k);
    s.hessian.add(b, a, -k);
  }
  return s;
}

}  // namespace

CoarseSolution solve_coarse(const HomogenizedLaw& law, const Mesh1D& mesh, const ForceFunctional& force,
                            const std::optional<CoarseFn>& init, const NewtonSettings& settings) {
  const Index m = mesh.num_nodes();
  const VectorXd b = force.loads(mesh);
  const VectorXd mw = mean_weights(mesh);

  CoarseSolution sol{init ? *init : CoarseFn(mesh), 0.0, 0, {}};
  if (!(sol.u.mesh() == mesh)) throw InvalidArgument("solve_coarse: initial guess lives on another mesh");
  sol.u.nodal().array() -= mw.dot(sol.u.nodal());

  CoarseSystem sys = assemble_coarse(law, sol.u, settings.threads);
  double res = coarse_dual_norm(sys.gradient - b);
  sol.trace.push_back({0, res, 0.0});
  std::vector<double> history{res};

  bool polished = false;
  for (int it = 1; it <= settings.max_iter; ++it) {
    if (res <= settings.tol) {
      if (polished) break;
      polished = true;
    }
    PeriodicBandMatrix h = sys.hessian;
    double diag = 0.0;
    for (Index i = 0; i < m; ++i) diag += h.get(i, i);
    h.add(m - 1, m - 1, diag / static_cast<double>(m));
    const PeriodicBandSolver solver(h);
    VectorXd step = solver.solve(-(sys.gradient - b));
    step.array() -= mw.dot(step);

    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k <= settings.damping_max; ++k, t *= 0.5) {
      try {
        CoarseFn trial(mesh, sol.u.nodal() + t * step);
        trial.nodal().array() -= mw.dot(trial.nodal());
        CoarseSystem trial_sys = assemble_coarse(law, trial, settings.threads);
        const double trial_res = coarse_dual_norm(trial_sys.gradient - b);
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
      throw SolverFailure("solve_coarse: line search failed, residual " + std::to_string(res), history);
    }
    sol.trace.push_back({it, res, t});
    history.push_back(res);
  }
  if (!(res <= settings.tol))
    throw SolverFailure("solve_coarse: no convergence, residual " + std::to_string(res), history);
  sol.residual_dual = res;
  return sol;
}

LatticeFn corrector(const HomogenizedLaw& law, const LatticeFn& u) {
  const LatticeGrid& grid = u.grid();
  if (grid.size() % law.period() != 0) throw InvalidArgument("corrector: N is not a multiple of p");
  const LatticeFn strain = diff(u, 1);
  LatticeFn out = u;
  const double eps = grid.spacing();
  for (Index i = 0; i < grid.size(); ++i) {
    const MicroSolution cell = law.solve_cell(strain[i]);
    out[i] += eps * cell.chi.at(i + 1);
  }
  return project_zero_mean(std::move(out));
}

EquivalenceReport equivalence_check(const HomogenizedLaw& law, const Mesh1D& mesh, const ForceFunctional& force,
                                    const NewtonSettings& settings) {
  CoarseSolution coarse = solve_coarse(law, mesh, force, std::nullopt, settings);
  const LatticeFn rhs = project_zero_mean(force.as_lattice(mesh));
  EquilibriumSolution full = solve_homogenized_full(law, mesh.grid(), rhs, settings);

  const LatticeFn uc = coarse.u.to_lattice();
  const double diff_max = norm(LatticeFn(uc - full.u), kInf);
  const LatticeFn du = diff(full.u, 1);
  double jump = 0.0;
  for (Index i = 0; i < du.size(); ++i)
    if (!mesh.is_node(i)) jump = std::max(jump, std::abs(du.at(i - 1) - du[i]));
  return {diff_max, jump, std::move(coarse), std::move(full)};
}

}  // namespace hqc
