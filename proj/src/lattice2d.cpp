#include "hqc/lattice2d.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <string>

namespace hqc {

SpringModel2D::SpringModel2D(double k1_, double k2_, double k3_) : k1(k1_), k2(k2_), k3(k3_) {
  if (!(k1 > 0.0 && k2 > 0.0 && k3 >= 0.0)) throw InvalidArgument("SpringModel2D: stiffnesses must be positive");
}

Displacement2D::Displacement2D(Index n1, Index n2) : Displacement2D(n1, n2, Eigen::MatrixXd::Zero(n1 * n2, 2)) {}

Displacement2D::Displacement2D(Index n1, Index n2, Eigen::MatrixXd values)
    : n1_(n1), n2_(n2), values_(std::move(values)) {
  if (n1 < 2 || n2 < 2) throw InvalidArgument("Displacement2D: grid too small");
  if (values_.rows() != n1 * n2 || values_.cols() != 2)
    throw InvalidArgument("Displacement2D: expected N1*N2 rows and 2 columns");
}

void Displacement2D::project_zero_mean() { values_.rowwise() -= values_.colwise().mean(); }

namespace {

void check_even(Index n1, Index n2) {
  if (n1 % 2 != 0 || n2 % 2 != 0) throw InvalidArgument("lattice2d: grid sizes must be even");
}

}  // namespace

Eigen::MatrixXd apply_stiffness2d(const SpringModel2D& model, Index n1, Index n2, const Eigen::MatrixXd& v) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  auto idx = [&](Index a, Index b) { return wrap_index(a, n1) * n2 + wrap_index(b, n2); };
  for (Index i1 = 0; i1 < n1; ++i1) {
    for (Index i2 = 0; i2 < n2; ++i2) {
      const Index x = idx(i1, i2);
      for (int d = 0; d < 4; ++d) {
        const Index y = idx(i1 + kBonds2D[d][0], i2 + kBonds2D[d][1]);
        const double k = model.stiffness(d, i1, i2);
        for (Index c = 0; c < v.cols(); ++c) {
          const double t = k * (v(x, c) - v(y, c));
          out(x, c) += t;
          out(y, c) -= t;
        }
      }
    }
  }
  return out;
}

Energy2D energy2d(const SpringModel2D& model, const Displacement2D& u) {
  check_even(u.n1(), u.n2());
  double e = 0.0;
  for (Index i1 = 0; i1 < u.n1(); ++i1)
    for (Index i2 = 0; i2 < u.n2(); ++i2)
      for (int d = 0; d < 4; ++d) {
        const double k = model.stiffness(d, i1, i2);
        for (int c = 0; c < 2; ++c) {
          const double du = u(i1 + kBonds2D[d][0], i2 + kBonds2D[d][1], c) - u(i1, i2, c);
          e += 0.5 * k * du * du;
        }
      }
  // eps^2 sum psi (du / eps)^2 / 2 carries no net eps; the gradient in the
  // eps^2-weighted pairing picks up eps^-2.
  const double eps = u.spacing();
  Displacement2D g(u.n1(), u.n2(), apply_stiffness2d(model, u.n1(), u.n2(), u.values()) / (eps * eps));
  return {e, std::move(g)};
}

CorrectorPattern chi_analytic(const SpringModel2D& model) {
  return {(model.k1 - model.k2) / (4.0 * (model.k1 + model.k2))};
}

Homogenized2D homogenize2d(const SpringModel2D& model) {
  // Scalar cell problem on the 2x2 torus: minimize
  //   sum_j sum_d k/2 (G . r_d + w(j + r_d) - w(j))^2
  // over zero-mean w; the energy is quadratic, so H w = -B G.
  Eigen::Matrix4d h = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, 2> b = Eigen::Matrix<double, 4, 2>::Zero();
  Eigen::Matrix2d q = Eigen::Matrix2d::Zero();  // unrelaxed G-G block
  auto cell = [](Index a, Index c) { return wrap_index(a, 2) * 2 + wrap_index(c, 2); };
  for (Index j1 = 0; j1 < 2; ++j1)
    for (Index j2 = 0; j2 < 2; ++j2)
      for (int d = 0; d < 4; ++d) {
        const double k = model.stiffness(d, j1, j2);
        const Index x = cell(j1, j2), y = cell(j1 + kBonds2D[d][0], j2 + kBonds2D[d][1]);
        const Eigen::Vector2d r(kBonds2D[d][0], kBonds2D[d][1]);
        // bond difference = r . G + w(y) - w(x)
        Eigen::Vector4d a = Eigen::Vector4d::Zero();
        a[y] += 1.0;
        a[x] -= 1.0;
        h += k * a * a.transpose();
        b += k * a * r.transpose();
        q += k * r * r.transpose();
      }
  // Constants are the only null mode; shifting by 1 1^T leaves zero-mean
  // solutions unchanged because B's columns are orthogonal to constants.
  const Eigen::Matrix4d shifted = h + Eigen::Matrix4d::Ones();
  Eigen::LLT<Eigen::Matrix4d> llt(shifted);
  if (llt.info() != Eigen::Success) throw StabilityFailure("homogenize2d: singular cell system");
  Homogenized2D out;
  out.cell_corrector = -llt.solve(b);
  out.cell_corrector.rowwise() -= out.cell_corrector.colwise().mean();
  // Relaxed energy per cell: 1/2 G^T (Q + B^T W) G; four sites per cell.
  out.stiffness = (q + b.transpose() * out.cell_corrector) / 4.0;
  out.stiffness = 0.5 * (out.stiffness + out.stiffness.transpose()).eval();
  if (out.stiffness.determinant() <= 0.0 || out.stiffness(0, 0) <= 0.0)
    throw StabilityFailure("homogenize2d: effective stiffness is not positive definite");
  return out;
}

Solve2DResult solve_atomistic2d(const SpringModel2D& model, const Displacement2D& f, const CGSettings& cg) {
  const Index n1 = f.n1(), n2 = f.n2();
  check_even(n1, n2);
  const double eps = f.spacing();
  Eigen::MatrixXd rhs = f.values() * (eps * eps);
  rhs.rowwise() -= rhs.colwise().mean();

  Solve2DResult res{Displacement2D(n1, n2), 0, 0.0};
  for (int c = 0; c < 2; ++c) {
    const Eigen::VectorXd b = rhs.col(c);
    const double bnorm = b.norm();
    if (bnorm == 0.0) continue;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b, p = r;
    double rr = r.squaredNorm();
    int it = 0;
    while (std::sqrt(rr) > cg.rel_tol * bnorm) {
      if (++it > cg.max_iter)
        throw SolverFailure("solve_atomistic2d: CG did not converge, relative residual " +
                            std::to_string(std::sqrt(rr) / bnorm));
      const Eigen::VectorXd ap = apply_stiffness2d(model, n1, n2, p);
      const double alpha = rr / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      r.array() -= r.mean();
      const double rr_new = r.squaredNorm();
      p = r + (rr_new / rr) * p;
      rr = rr_new;
    }
    x.array() -= x.mean();
    res.u.values().col(c) = x;
    res.iterations = std::max(res.iterations, it);
    // True residual, not the recursively updated one.
    const Eigen::VectorXd tr = b - apply_stiffness2d(model, n1, n2, x);
    res.relative_residual = std::max(res.relative_residual, tr.norm() / bnorm);
  }
  return res;
}

Coarse2DResult solve_coarse2d(const SpringModel2D& model, const Homogenized2D& hom, const Displacement2D& f, Index t) {
  const Index n = f.n1();
  if (f.n2() != n) throw InvalidArgument("solve_coarse2d: square grids only");
  check_even(n, n);
  if (t < 2 || n % t != 0) throw InvalidArgument("solve_coarse2d: t must divide N");
  const Index m = n / t;  // sites per element edge
  const double eps = f.spacing();
  const double hh = 1.0 / static_cast<double>(t);
  const Index nodes = t * t;
  auto node = [&](Index a, Index b) { return wrap_index(a, t) * t + wrap_index(b, t); };

  // Reference gradients of the three hat functions on each triangle type,
  // in units of 1/H. Lower triangle: (0,0),(1,0),(1,1); upper: (0,0),(1,1),(0,1).
  const Eigen::Matrix<double, 2, 3> g_lower = (Eigen::Matrix<double, 2, 3>() << -1, 1, 0, 0, -1, 1).finished();
  const Eigen::Matrix<double, 2, 3> g_upper = (Eigen::Matrix<double, 2, 3>() << 0, 1, -1, -1, 0, 1).finished();
  const Eigen::Matrix3d k_lower = 0.5 * g_lower.transpose() * hom.stiffness * g_lower;
  const Eigen::Matrix3d k_upper = 0.5 * g_upper.transpose() * hom.stiffness * g_upper;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(18 * nodes + 1));
  for (Index a = 0; a < t; ++a)
    for (Index b = 0; b < t; ++b) {
      const std::array<Index, 3> lo{node(a, b), node(a + 1, b), node(a + 1, b + 1)};
      const std::array<Index, 3> up{node(a, b), node(a + 1, b + 1), node(a, b + 1)};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          trip.emplace_back(lo[i], lo[j], k_lower(i, j));
          trip.emplace_back(up[i], up[j], k_upper(i, j));
        }
    }
  // Rank-one shift on the last node removes the constant null mode.
  double diag = 0.0;
  for (Index a = 0; a < 3; ++a) diag += k_lower(a, a) + k_upper(a, a);
  trip.emplace_back(nodes - 1, nodes - 1, diag);
  Eigen::SparseMatrix<double> kmat(nodes, nodes);
  kmat.setFromTriplets(trip.begin(), trip.end());

  // Barycentric weights of site (i1, i2) and the element it lies in.
  struct Weights {
    std::array<Index, 3> nodes;
    std::array<double, 3> w;
    bool lower;
    Index a, b;
  };
  auto locate = [&](Index i1, Index i2) {
    const Index a = i1 / m, b = i2 / m;
    const double s1 = static_cast<double>(i1 - a * m) / m, s2 = static_cast<double>(i2 - b * m) / m;
    if (s1 >= s2) return Weights{{node(a, b), node(a + 1, b), node(a + 1, b + 1)}, {1 - s1, s1 - s2, s2}, true, a, b};
    return Weights{{node(a, b), node(a + 1, b + 1), node(a, b + 1)}, {1 - s2, s1, s2 - s1}, false, a, b};
  };

  Eigen::MatrixXd loads = Eigen::MatrixXd::Zero(nodes, 2);
  Eigen::MatrixXd fz = f.values();
  fz.rowwise() -= fz.colwise().mean();
  for (Index i1 = 0; i1 < n; ++i1)
    for (Index i2 = 0; i2 < n; ++i2) {
      const Weights w = locate(i1, i2);
      for (int k = 0; k < 3; ++k) loads.row(w.nodes[k]) += eps * eps * w.w[k] * fz.row(f.index(i1, i2));
    }

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(kmat);
  if (llt.info() != Eigen::Success) throw StabilityFailure("solve_coarse2d: stiffness matrix is not positive definite");
  Coarse2DResult out{Displacement2D(n, n), Displacement2D(n, n), llt.solve(loads), t};

  const CorrectorPattern chi = chi_analytic(model);
  for (Index i1 = 0; i1 < n; ++i1)
    for (Index i2 = 0; i2 < n; ++i2) {
      const Weights w = locate(i1, i2);
      const Index row = f.index(i1, i2);
      for (int c = 0; c < 2; ++c) {
        const double u0 = out.nodal(w.nodes[0], c), u1 = out.nodal(w.nodes[1], c), u2 = out.nodal(w.nodes[2], c);
        const Eigen::Vector3d un(u0, u1, u2);
        const Eigen::Vector2d grad = (w.lower ? g_lower : g_upper) * un / hh;
        const double val = w.w[0] * u0 + w.w[1] * u1 + w.w[2] * u2;
        out.u_coarse.values()(row, c) = val;
        out.u_corrected.values()(row, c) = val + eps * chi.coefficient(i1, i2) * (grad[0] + grad[1]);
      }
    }
  // Shift so that the coarse field has zero lattice mean, then project the corrected one.
  const Eigen::RowVector2d shift = out.u_coarse.values().colwise().mean();
  out.nodal.rowwise() -= shift;
  out.u_coarse.values().rowwise() -= shift;
  out.u_corrected.project_zero_mean();
  return out;
}

double gradient_error(const Displacement2D& u, const Displacement2D& v) {
  if (u.n1() != v.n1() || u.n2() != v.n2()) throw InvalidArgument("gradient_error: grid mismatch");
  const double inv_eps = 1.0 / u.spacing();
  double err = 0.0;
  for (Index i1 = 0; i1 < u.n1(); ++i1)
    for (Index i2 = 0; i2 < u.n2(); ++i2)
      for (int c = 0; c < 2; ++c) {
        const double d0 = u(i1, i2, c) - v(i1, i2, c);
        const double d1 = u(i1 + 1, i2, c) - v(i1 + 1, i2, c);
        const double d2 = u(i1, i2 + 1, c) - v(i1, i2 + 1, c);
        err = std::max({err, std::abs(d1 - d0) * inv_eps, std::abs(d2 - d0) * inv_eps});
      }
  return err;
}

Displacement2D bump_force_2d(Index n, double amplitude) {
  Displacement2D f(n, n);
  const double pi = std::numbers::pi;
  for (Index i1 = 0; i1 < n; ++i1)
    for (Index i2 = 0; i2 < n; ++i2) {
      const double x1 = static_cast<double>(i1 + 1) / n, x2 = static_cast<double>(i2 + 1) / n;
      const double c1 = std::cos(pi * x1), c2 = std::cos(pi * x2);
      const double e = amplitude * std::exp(-c1 * c1 - c2 * c2);
      f(i1, i2, 0) = e * std::sin(2 * pi * x1);
      f(i1, i2, 1) = e * std::sin(2 * pi * x2);
    }
  f.project_zero_mean();
  return f;
}

}  // namespace hqc
