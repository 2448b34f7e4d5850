#pragma once

// Coarse-grained (homogenized quasicontinuum) discretization on an
// atom-aligned periodic mesh.

#include <optional>
#include <vector>

#include "hqc/atomistic.hpp"

namespace hqc {

/// Periodic mesh whose nodes are lattice sites (storage indices 0..N-1).
/// Element j spans [nodes[j], nodes[j+1]); the last one wraps around.
class Mesh1D {
 public:
  Mesh1D(LatticeGrid grid, std::vector<Index> nodes);

  /// m equally spaced nodes; m must divide N. The site x = 1 is always a node.
  static Mesh1D uniform(const LatticeGrid& grid, Index nodes);
  static Mesh1D full(const LatticeGrid& grid) { return uniform(grid, grid.size()); }

  const LatticeGrid& grid() const { return grid_; }
  const std::vector<Index>& nodes() const { return nodes_; }
  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }
  Index num_elements() const { return num_nodes(); }

  Index left(Index e) const { return nodes_[static_cast<std::size_t>(e)]; }
  /// Right end of element e, unwrapped (may equal N + nodes[0]).
  Index right(Index e) const;
  /// Number of sites in element e.
  Index sites(Index e) const { return right(e) - left(e); }
  double h(Index e) const { return static_cast<double>(sites(e)) * grid_.spacing(); }
  double h_max() const;

  bool is_node(Index site) const;
  /// Element containing a site.
  Index element_of(Index site) const;
  /// h(x) as a lattice function.
  LatticeFn mesh_size() const;

  bool operator==(const Mesh1D&) const = default;

 private:
  LatticeGrid grid_;
  std::vector<Index> nodes_;
};

/// Continuous piecewise-affine lattice function given by its nodal values.
class CoarseFn {
 public:
  explicit CoarseFn(Mesh1D mesh);
  CoarseFn(Mesh1D mesh, VectorXd nodal);

  const Mesh1D& mesh() const { return mesh_; }
  const VectorXd& nodal() const { return nodal_; }
  VectorXd& nodal() { return nodal_; }

  /// Constant strain on element e.
  double strain(Index e) const;
  LatticeFn to_lattice() const;

 private:
  Mesh1D mesh_;
  VectorXd nodal_;
};

CoarseFn interpolate(const Mesh1D& mesh, const LatticeFn& v);

/// Adjoint of the nodal interpolant in the lattice pairing; supported on nodes.
LatticeFn istar(const Mesh1D& mesh, const LatticeFn& w);

enum class ForceKind { exact_summation, node_lumped };

/// F^h as nodal loads b with <F^h, v_h>_h = sum_xi b_xi v_h(xi).
struct ForceFunctional {
  ForceKind kind = ForceKind::exact_summation;
  LatticeFn f;

  VectorXd loads(const Mesh1D& mesh) const;
  /// Lattice representative r with <r, v>_L = <F^h, I_h v>_h.
  LatticeFn as_lattice(const Mesh1D& mesh) const;
};

struct CoarseSolution {
  CoarseFn u;
  double residual_dual = 0.0;
  int iterations = 0;
  std::vector<NewtonStep> trace;
};

/// Coarse residual in the dual norm over the coarse space (|v_h|_{1,1} = 1).
double coarse_dual_norm(const VectorXd& nodal_residual);

/// Newton for <dE0(u_h), v_h>_L = <F^h, v_h>_h over zero-mean coarse functions.
CoarseSolution solve_coarse(const HomogenizedLaw& law, const Mesh1D& mesh, const ForceFunctional& force,
                            const std::optional<CoarseFn>& init = std::nullopt,
                            const NewtonSettings& settings = {});

/// I_#(u + eps chi(Du(x); x/eps)).
LatticeFn corrector(const HomogenizedLaw& law, const LatticeFn& u);
inline LatticeFn corrector(const HomogenizedLaw& law, const CoarseFn& u) {
  return corrector(law, u.to_lattice());
}

struct EquivalenceReport {
  double max_difference;
  double max_strain_jump;
  CoarseSolution coarse;
  EquilibriumSolution full;
};

/// Solves the coarse problem and the full-lattice homogenized problem with
/// right-hand side I_h* F^h, and compares them.
EquivalenceReport equivalence_check(const HomogenizedLaw& law, const Mesh1D& mesh, const ForceFunctional& force,
                                    const NewtonSettings& settings = {});

}  // namespace hqc
