#include "hqc/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace hqc {

ErrorReport indicator_terms(const CoarseFn& u0h, const LatticeFn& f, const ForceFunctional& force,
                            double calibration_constant, double c0_inv) {
  const Mesh1D& mesh = u0h.mesh();
  if (!(f.grid() == mesh.grid())) throw InvalidArgument("indicator_terms: grid mismatch");
  const Index m = mesh.num_nodes();

  ErrorReport rep;
  rep.calibration_constant = calibration_constant;
  rep.c0_inv = c0_inv;

  // Node j sits between element j-1 and element j.
  VectorXd jumps(m);
  for (Index j = 0; j < m; ++j) jumps[j] = std::abs(u0h.strain(j) - u0h.strain((j + m - 1) % m));
  rep.jump_term = jumps.maxCoeff();
  rep.per_element_jumps.resize(static_cast<std::size_t>(m));
  for (Index e = 0; e < m; ++e) rep.per_element_jumps[static_cast<std::size_t>(e)] = 0.5 * (jumps[e] + jumps[(e + 1) % m]);

  const LatticeFn h = mesh.mesh_size();
  const double eps = mesh.grid().spacing();
  double ft = 0.0;
  for (Index i = 0; i < f.size(); ++i) ft = std::max(ft, std::abs((h[i] - eps) * f[i]));
  rep.force_term = ft;

  const ForceFunctional exact{ForceKind::exact_summation, f};
  rep.quadrature_term = coarse_dual_norm(force.loads(mesh) - exact.loads(mesh));
  rep.recompute_total();
  return rep;
}

Constants estimate_constants(const PotentialFamily& family, const Microstructure& micro, double z_min,
                             double z_max, int samples) {
  if (!(z_max >= z_min) || samples < 1) throw InvalidArgument("estimate_constants: empty sampling range");
  double c11 = 0.0;
  bool any = false;
  for (Index y = 0; y < family.period(); ++y) {
    double sum = 0.0;
    for (int r = 1; r <= family.range(); ++r) {
      double worst = 0.0;
      for (int k = 0; k < samples; ++k) {
        const double z = samples == 1 ? z_min : z_min + (z_max - z_min) * k / (samples - 1);
        if (!family.admissible(r, z, y)) continue;
        any = true;
        worst = std::max(worst, std::abs(family.d2(r, z, y)));
      }
      sum += r * worst;
    }
    c11 = std::max(c11, sum);
  }
  if (!any) throw InvalidArgument("estimate_constants: no admissible strain in the sampling range");
  return {c11, nn_dominance_margin(family, micro)};
}

double fit_calibration(const ErrorReport& report, double err) {
  if (report.jump_term <= 0.0) return 0.0;
  return std::max(0.0, (err - report.c0_inv * report.force_term - report.quadrature_term) / report.jump_term);
}

Mesh1D adapt_mesh(const Mesh1D& mesh, const ErrorReport& report, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("adapt_mesh: theta must lie in (0, 1]");
  const Index m = mesh.num_elements();
  if (static_cast<Index>(report.per_element_jumps.size()) != m)
    throw InvalidArgument("adapt_mesh: one indicator per element required");

  std::vector<Index> order;
  double total = 0.0;
  for (Index e = 0; e < m; ++e) {
    if (mesh.sites(e) < 2) continue;
    order.push_back(e);
    total += report.per_element_jumps[static_cast<std::size_t>(e)];
  }
  if (order.empty() || !(total > 0.0)) return mesh;
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return report.per_element_jumps[static_cast<std::size_t>(a)] > report.per_element_jumps[static_cast<std::size_t>(b)];
  });

  std::vector<Index> nodes = mesh.nodes();
  double acc = 0.0;
  const double target = theta * total * (1.0 - 1e-12);
  for (Index e : order) {
    if (acc >= target) break;
    acc += report.per_element_jumps[static_cast<std::size_t>(e)];
    nodes.push_back(mesh.grid().wrap(mesh.left(e) + mesh.sites(e) / 2));
  }
  std::sort(nodes.begin(), nodes.end());
  return Mesh1D(mesh.grid(), std::move(nodes));
}

}  // namespace hqc
