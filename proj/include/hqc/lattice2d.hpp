#pragma once

// Linear two-dimensional spring lattice with a (2,2)-periodic checkerboard of
// nearest-neighbour stiffnesses. The two displacement components decouple,
// so every operator acts on each column independently.

#include <Eigen/Core>

#include <array>
#include <optional>

#include "hqc/lattice.hpp"

namespace hqc {

/// Bond directions (1,0), (0,1), (1,1), (-1,1); reflections are implied.
inline constexpr std::array<std::array<int, 2>, 4> kBonds2D{{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};

struct SpringModel2D {
  double k1 = 1.0;
  double k2 = 2.0;
  double k3 = 0.25;

  SpringModel2D() = default;
  SpringModel2D(double k1, double k2, double k3);

  /// Stiffness of the bond leaving site (i1, i2) in direction kBonds2D[dir].
  double stiffness(int dir, Index i1, Index i2) const {
    if (dir >= 2) return k3;
    return ((i1 + i2) & 1) == 0 ? k1 : k2;
  }
};

/// Two displacement components per site on a periodic N1 x N2 grid.
/// Row i1 * N2 + i2 holds site (i1, i2); x = ((i1 + 1) eps, (i2 + 1) eps), eps = 1/N1.
class Displacement2D {
 public:
  Displacement2D(Index n1, Index n2);
  Displacement2D(Index n1, Index n2, Eigen::MatrixXd values);

  Index n1() const { return n1_; }
  Index n2() const { return n2_; }
  double spacing() const { return 1.0 / static_cast<double>(n1_); }
  Index index(Index i1, Index i2) const { return wrap_index(i1, n1_) * n2_ + wrap_index(i2, n2_); }

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }
  double operator()(Index i1, Index i2, int c) const { return values_(index(i1, i2), c); }
  double& operator()(Index i1, Index i2, int c) { return values_(index(i1, i2), c); }

  /// Removes the mean of each component.
  void project_zero_mean();

 private:
  Index n1_;
  Index n2_;
  Eigen::MatrixXd values_;
};

struct Energy2D {
  double energy;
  /// Lattice representative: <g, v> = eps^2 sum g . v equals dE(u) v.
  Displacement2D gradient;
};

Energy2D energy2d(const SpringModel2D& model, const Displacement2D& u);

/// K v with (K v)(x) = sum of k (v(x) - v(y)) over the bonds x-y; K u = eps^2 f is the equilibrium.
Eigen::MatrixXd apply_stiffness2d(const SpringModel2D& model, Index n1, Index n2, const Eigen::MatrixXd& v);

struct CorrectorPattern {
  /// (k1 - k2) / (4 (k1 + k2)).
  double s;
  int sign(Index j1, Index j2) const { return ((j1 + j2) & 1) == 0 ? 1 : -1; }
  /// Coefficient of the corrector at cell site (j1, j2).
  double coefficient(Index j1, Index j2) const { return sign(j1, j2) * s; }
};

/// chi(j) = (-1)^{j1+j2} s I, acting on F (1,1)^T for a displacement gradient F.
CorrectorPattern chi_analytic(const SpringModel2D& model);

struct Homogenized2D {
  /// W(G) = 1/2 G^T A G per site, for each displacement component.
  Eigen::Matrix2d stiffness;
  /// cell_corrector(j1 * 2 + j2, beta): corrector at cell site j per unit dG/dx_beta.
  Eigen::Matrix<double, 4, 2> cell_corrector;
  /// Energy per site of the relaxed cell at gradient G.
  double energy_density(const Eigen::Vector2d& g) const { return 0.5 * g.dot(stiffness * g); }
};

/// Numerical cell problem on the 4-atom (2,2) cell. All sampling domains of
/// the coarse solver share this one solve since the model is periodic.
Homogenized2D homogenize2d(const SpringModel2D& model);

struct CGSettings {
  double rel_tol = 1e-10;
  int max_iter = 100000;
};

struct Solve2DResult {
  Displacement2D u;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// CG on the periodic lattice system, each component zero mean.
Solve2DResult solve_atomistic2d(const SpringModel2D& model, const Displacement2D& f, const CGSettings& cg = {});

struct Coarse2DResult {
  /// P1 solution evaluated at every site.
  Displacement2D u_coarse;
  /// u_coarse plus eps chi(grad u_coarse), zero mean.
  Displacement2D u_corrected;
  /// Nodal values, row a * t + b for node (a, b).
  Eigen::MatrixXd nodal;
  Index t = 0;
};

/// P1 elements on a t x t periodic grid of squares split along the (1,1) diagonal,
/// homogenized stiffness, loads by exact summation, corrector per site.
Coarse2DResult solve_coarse2d(const SpringModel2D& model, const Homogenized2D& hom, const Displacement2D& f, Index t);

/// max over sites, components and directions of |D_j (u - v)|.
double gradient_error(const Displacement2D& u, const Displacement2D& v);

/// a e^{-cos^2(pi x1) - cos^2(pi x2)} (sin 2 pi x1, sin 2 pi x2) minus its mean, on an n x n grid.
Displacement2D bump_force_2d(Index n, double amplitude = 10.0);

}  // namespace hqc
