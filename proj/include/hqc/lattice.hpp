#pragma once

// Periodic lattice functions on L = {eps, 2 eps, ..., N eps} and on the
// micro cell P = {1, ..., p}, with the discrete difference, translation and
// averaging operators, norms and the (-1, inf) dual seminorm.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "hqc/errors.hpp"

namespace hqc {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Python-style modulus, always in [0, m).
constexpr Index wrap_index(Index k, Index m) {
  const Index r = k % m;
  return r < 0 ? r + m : r;
}

/// N-site periodic chain with spacing 1/N and microstructure period p.
///
/// Storage index i (0-based) is the site x = (i + 1) eps. Its species is
/// y = (i + 1) mod p, which is also the storage index into every p-periodic
/// array (MicroFn values, potential parameters).
class LatticeGrid {
 public:
  explicit LatticeGrid(Index n = 2, Index period = 1) : n_(n), p_(period) {
    if (n < 2) throw InvalidArgument("LatticeGrid: N must be at least 2");
    if (period < 1) throw InvalidArgument("LatticeGrid: p must be positive");
    if (n % period != 0)
      throw InvalidArgument("LatticeGrid: N = " + std::to_string(n) +
                            " is not a multiple of p = " + std::to_string(period));
  }

  Index size() const { return n_; }
  Index period() const { return p_; }
  double spacing() const { return 1.0 / static_cast<double>(n_); }

  Index wrap(Index i) const { return wrap_index(i, n_); }
  Index species(Index i) const { return wrap_index(i + 1, p_); }
  /// Reference position x of storage index i.
  double position(Index i) const { return static_cast<double>(i + 1) / static_cast<double>(n_); }

  friend bool operator==(const LatticeGrid&, const LatticeGrid&) = default;

 private:
  Index n_;
  Index p_;
};

/// Real-valued eps*N-periodic function on the lattice.
template <typename Scalar>
class BasicLatticeFn {
 public:
  using VectorType = Vector<Scalar>;

  BasicLatticeFn() : grid_(), values_(VectorType::Zero(grid_.size())) {}
  explicit BasicLatticeFn(const LatticeGrid& grid)
      : grid_(grid), values_(VectorType::Zero(grid.size())) {}

  template <typename Derived>
  BasicLatticeFn(const LatticeGrid& grid, const Eigen::MatrixBase<Derived>& values)
      : grid_(grid), values_(values) {
    if (values_.size() != grid.size())
      throw InvalidArgument("LatticeFn: value count does not match the grid");
  }

  template <typename F>
  static BasicLatticeFn sample(const LatticeGrid& grid, F&& f) {
    BasicLatticeFn u(grid);
    for (Index i = 0; i < grid.size(); ++i) u.values_[i] = f(grid.position(i));
    return u;
  }

  const LatticeGrid& grid() const { return grid_; }
  Index size() const { return grid_.size(); }

  const VectorType& values() const { return values_; }
  VectorType& values() { return values_; }

  Scalar operator[](Index i) const { return values_[i]; }
  Scalar& operator[](Index i) { return values_[i]; }

  /// Periodic access by any integer storage index.
  Scalar at(Index i) const { return values_[grid_.wrap(i)]; }

  BasicLatticeFn& operator+=(const BasicLatticeFn& o) {
    check_same_grid(o);
    values_ += o.values_;
    return *this;
  }
  BasicLatticeFn& operator-=(const BasicLatticeFn& o) {
    check_same_grid(o);
    values_ -= o.values_;
    return *this;
  }
  BasicLatticeFn& operator*=(Scalar s) {
    values_ *= s;
    return *this;
  }

  friend BasicLatticeFn operator+(BasicLatticeFn a, const BasicLatticeFn& b) { return a += b; }
  friend BasicLatticeFn operator-(BasicLatticeFn a, const BasicLatticeFn& b) { return a -= b; }
  friend BasicLatticeFn operator*(Scalar s, BasicLatticeFn a) { return a *= s; }
  friend BasicLatticeFn operator*(BasicLatticeFn a, Scalar s) { return a *= s; }

  void check_same_grid(const BasicLatticeFn& o) const {
    if (!(grid_ == o.grid_)) throw InvalidArgument("LatticeFn: grid mismatch");
  }

 private:
  LatticeGrid grid_;
  VectorType values_;
};

using LatticeFn = BasicLatticeFn<double>;

/// p-periodic function on the micro cell, lattice spacing 1.
/// Storage index j is the residue y mod p.
template <typename Scalar>
class BasicMicroFn {
 public:
  using VectorType = Vector<Scalar>;

  explicit BasicMicroFn(Index period = 1) : values_(VectorType::Zero(period)) {
    if (period < 1) throw InvalidArgument("MicroFn: period must be positive");
  }
  template <typename Derived>
  explicit BasicMicroFn(const Eigen::MatrixBase<Derived>& values) : values_(values) {
    if (values_.size() < 1) throw InvalidArgument("MicroFn: empty");
  }

  Index period() const { return values_.size(); }
  const VectorType& values() const { return values_; }
  VectorType& values() { return values_; }

  Scalar operator[](Index j) const { return values_[j]; }
  Scalar& operator[](Index j) { return values_[j]; }
  Scalar at(Index y) const { return values_[wrap_index(y, period())]; }

  /// D_{y,r} chi(y) = (chi(y + r) - chi(y)) / r at residue y.
  Scalar diff(Index y, Index r) const { return (at(y + r) - at(y)) / static_cast<Scalar>(r); }

 private:
  VectorType values_;
};

using MicroFn = BasicMicroFn<double>;

// ---------------------------------------------------------------------------
// Operators

/// r-step difference D_{x,r} u(x) = (u(x + r eps) - u(x)) / (r eps).
template <typename Scalar>
BasicLatticeFn<Scalar> diff(const BasicLatticeFn<Scalar>& u, Index r = 1) {
  if (r == 0) throw InvalidArgument("diff: step r must be nonzero");
  const auto& g = u.grid();
  const Scalar scale = static_cast<Scalar>(g.size()) / static_cast<Scalar>(r);
  BasicLatticeFn<Scalar> out(g);
  for (Index i = 0; i < g.size(); ++i) out[i] = (u.at(i + r) - u[i]) * scale;
  return out;
}

/// Transpose of diff with respect to <.,.>_L: <diff_adjoint(a, r), v> = <a, diff(v, r)>.
template <typename Scalar>
BasicLatticeFn<Scalar> diff_adjoint(const BasicLatticeFn<Scalar>& a, Index r = 1) {
  if (r == 0) throw InvalidArgument("diff_adjoint: step r must be nonzero");
  const auto& g = a.grid();
  const Scalar scale = static_cast<Scalar>(g.size()) / static_cast<Scalar>(r);
  BasicLatticeFn<Scalar> out(g);
  for (Index i = 0; i < g.size(); ++i) out[i] = (a.at(i - r) - a[i]) * scale;
  return out;
}

/// T_x^k u(x) = u(x + k eps).
template <typename Scalar>
BasicLatticeFn<Scalar> translate(const BasicLatticeFn<Scalar>& u, Index k = 1) {
  BasicLatticeFn<Scalar> out(u.grid());
  for (Index i = 0; i < u.size(); ++i) out[i] = u.at(i + k);
  return out;
}

/// A_{x,r} u = (1/r) sum_{k<r} T^k u.
template <typename Scalar>
BasicLatticeFn<Scalar> average(const BasicLatticeFn<Scalar>& u, Index r) {
  if (r <= 0) throw InvalidArgument("average: r must be positive");
  BasicLatticeFn<Scalar> out(u.grid());
  for (Index i = 0; i < u.size(); ++i) {
    Scalar s = 0;
    for (Index k = 0; k < r; ++k) s += u.at(i + k);
    out[i] = s / static_cast<Scalar>(r);
  }
  return out;
}

template <typename Scalar>
Scalar mean(const BasicLatticeFn<Scalar>& u) {
  Scalar s = 0;
  for (Index i = 0; i < u.size(); ++i) s += u[i];
  return s / static_cast<Scalar>(u.size());
}

/// I_# u = u - <u>_L.
template <typename Scalar>
BasicLatticeFn<Scalar> project_zero_mean(BasicLatticeFn<Scalar> u) {
  const Scalar m = mean(u);
  u.values().array() -= m;
  return u;
}

template <typename Scalar>
Scalar inner(const BasicLatticeFn<Scalar>& u, const BasicLatticeFn<Scalar>& v) {
  u.check_same_grid(v);
  Scalar s = 0;
  for (Index i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s / static_cast<Scalar>(u.size());
}

/// ||u||_q with the normalised counting measure; q = kInf gives the max norm.
template <typename Scalar>
Scalar norm(const BasicLatticeFn<Scalar>& u, double q = kInf) {
  using std::abs;
  using std::pow;
  if (!(q >= 1.0)) throw InvalidArgument("norm: q must be >= 1");
  if (std::isinf(q)) {
    Scalar m = 0;
    for (Index i = 0; i < u.size(); ++i) m = std::max<Scalar>(m, abs(u[i]));
    return m;
  }
  Scalar s = 0;
  for (Index i = 0; i < u.size(); ++i) s += pow(abs(u[i]), q);
  return pow(s / static_cast<Scalar>(u.size()), 1.0 / q);
}

/// |u|_{m,q} = ||D^m u||_q for m >= 0.
template <typename Scalar>
Scalar seminorm(const BasicLatticeFn<Scalar>& u, int m, double q = kInf) {
  if (m < 0) throw InvalidArgument("seminorm: negative order needs dual_seminorm_neg1");
  BasicLatticeFn<Scalar> d = u;
  for (int k = 0; k < m; ++k) d = diff(d, 1);
  return norm(d, q);
}

/// (max W - min W) / 2 for the running sums W_i = sum_{j<=i} loads_j.
///
/// This is the dual norm of the functional v -> sum_i loads_i v_i over
/// periodic v with unit total variation, provided sum(loads) = 0.
template <typename Derived>
typename Derived::Scalar primitive_half_range(const Eigen::MatrixBase<Derived>& loads) {
  using Scalar = typename Derived::Scalar;
  Scalar w = 0, lo = 0, hi = 0;
  for (Index i = 0; i < loads.size(); ++i) {
    w += loads[i];
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  return (hi - lo) / Scalar(2);
}

/// |u|_{-1,inf} = sup { <u, v>_L : <v> = 0, |v|_{1,1} = 1 } for zero-mean u.
template <typename Scalar>
Scalar dual_seminorm_neg1(const BasicLatticeFn<Scalar>& u, double mean_tol = 1e-12) {
  using std::abs;
  const Scalar scale = std::max<Scalar>(Scalar(1), norm(u, kInf));
  if (abs(mean(u)) > mean_tol * scale)
    throw InvalidArgument("dual_seminorm_neg1: argument must have zero mean");
  // Running sums of u/N are a discrete primitive w with D w(x) = u(x + eps).
  return primitive_half_range(u.values() / static_cast<Scalar>(u.size()));
}

}  // namespace hqc
