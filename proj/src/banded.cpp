#include "hqc/banded.hpp"

#include <cmath>
#include <string>

namespace hqc {

PeriodicBandMatrix::PeriodicBandMatrix(Index n, Index halfwidth)
    : n_(n), r_(halfwidth), band_(Eigen::MatrixXd::Zero(n, 2 * halfwidth + 1)) {
  if (n < 1 || halfwidth < 0) throw InvalidArgument("PeriodicBandMatrix: bad dimensions");
}

Index PeriodicBandMatrix::offset_of(Index i, Index j) const {
  // Canonical offset in (-n/2, n/2]; for n <= 2R several offsets would alias,
  // so the representative closest to zero is used.
  Index k = wrap_index(j - i, n_);
  if (k > n_ / 2) k -= n_;
  if (k < -r_ || k > r_)
    throw InvalidArgument("PeriodicBandMatrix: entry (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") outside the band");
  return k;
}

void PeriodicBandMatrix::add(Index i, Index j, double v) {
  band_(wrap_index(i, n_), offset_of(wrap_index(i, n_), j) + r_) += v;
}

double PeriodicBandMatrix::get(Index i, Index j) const {
  i = wrap_index(i, n_);
  Index k = wrap_index(j - i, n_);
  if (k > n_ / 2) k -= n_;
  if (k < -r_ || k > r_) return 0.0;
  return band_(i, k + r_);
}

VectorXd PeriodicBandMatrix::operator*(const VectorXd& x) const {
  VectorXd y = VectorXd::Zero(n_);
  for (Index i = 0; i < n_; ++i)
    for (Index k = -r_; k <= r_; ++k) y[i] += band_(i, k + r_) * x[wrap_index(i + k, n_)];
  return y;
}

Eigen::MatrixXd PeriodicBandMatrix::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index k = -r_; k <= r_; ++k) a(i, wrap_index(i + k, n_)) += band_(i, k + r_);
  return a;
}

PeriodicBandSolver::PeriodicBandSolver(const PeriodicBandMatrix& a)
    : n_(a.size()), r_(a.halfwidth()) {
  if (n_ < 3 * r_ + 2 || r_ == 0) {
    dense_ = true;
    dense_llt_.compute(a.to_dense());
    if (dense_llt_.info() != Eigen::Success)
      throw StabilityFailure("PeriodicBandSolver: matrix is not positive definite");
    return;
  }

  interior_ = n_ - r_;
  const Index n1 = interior_;

  chol_ = Eigen::MatrixXd::Zero(n1, r_ + 1);
  auto L = [&](Index i, Index j) -> double& { return chol_(i, i - j); };
  for (Index i = 0; i < n1; ++i) {
    const Index j0 = std::max<Index>(0, i - r_);
    for (Index j = j0; j <= i; ++j) {
      double s = a.get(i, j);
      for (Index k = std::max<Index>(j0, j - r_); k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (!(s > 0.0))
          throw StabilityFailure("PeriodicBandSolver: matrix is not positive definite (pivot " +
                                 std::to_string(i) + ")");
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }

  border_ = Eigen::MatrixXd::Zero(n1, r_);
  for (Index i = 0; i < n1; ++i)
    for (Index c = 0; c < r_; ++c) border_(i, c) = a.get(i, n1 + c);

  coupling_.resize(n1, r_);
  for (Index c = 0; c < r_; ++c) coupling_.col(c) = band_solve(border_.col(c));

  Eigen::MatrixXd s(r_, r_);
  for (Index i = 0; i < r_; ++i)
    for (Index j = 0; j < r_; ++j) s(i, j) = a.get(n1 + i, n1 + j);
  s -= border_.transpose() * coupling_;
  schur_.compute(s);
  if (schur_.info() != Eigen::Success)
    throw StabilityFailure("PeriodicBandSolver: border Schur complement is not positive definite");
}

VectorXd PeriodicBandSolver::band_solve(const VectorXd& b) const {
  const Index n1 = interior_;
  VectorXd y(n1);
  for (Index i = 0; i < n1; ++i) {
    double s = b[i];
    for (Index j = std::max<Index>(0, i - r_); j < i; ++j) s -= chol_(i, i - j) * y[j];
    y[i] = s / chol_(i, 0);
  }
  for (Index i = n1 - 1; i >= 0; --i) {
    double s = y[i];
    for (Index j = i + 1; j <= std::min<Index>(n1 - 1, i + r_); ++j) s -= chol_(j, j - i) * y[j];
    y[i] = s / chol_(i, 0);
  }
  return y;
}

VectorXd PeriodicBandSolver::solve(const VectorXd& b) const {
  if (b.size() != n_) throw InvalidArgument("PeriodicBandSolver: right-hand side size mismatch");
  if (dense_) return dense_llt_.solve(b);
  const Index n1 = interior_;
  const VectorXd y1 = band_solve(b.head(n1));
  const VectorXd x2 = schur_.solve(b.tail(r_) - border_.transpose() * y1);
  VectorXd x(n_);
  x.head(n1) = y1 - coupling_ * x2;
  x.tail(r_) = x2;
  return x;
}

}  // namespace hqc
