#pragma once

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include "hqc/lattice.hpp"

namespace hqc {

/// Square matrix whose nonzeros satisfy |i - j| <= R modulo n (a periodic band).
///
/// Row i stores the entries A(i, i + k mod n) for k = -R..R.
class PeriodicBandMatrix {
 public:
  PeriodicBandMatrix(Index n, Index halfwidth);

  Index size() const { return n_; }
  Index halfwidth() const { return r_; }

  /// A(i, j) += v, indices taken modulo n. |j - i| must be within the band.
  void add(Index i, Index j, double v);
  double get(Index i, Index j) const;

  VectorXd operator*(const VectorXd& x) const;
  Eigen::MatrixXd to_dense() const;

 private:
  Index offset_of(Index i, Index j) const;

  Index n_;
  Index r_;
  Eigen::MatrixXd band_;
};

/// Cholesky solver for symmetric positive definite periodic band matrices.
///
/// The last R unknowns form a border: the leading block is a plain band
/// matrix (banded Cholesky, O(n R^2)) and the border is closed with an
/// R x R Schur complement. Small systems fall back to a dense LLT.
/// Throws StabilityFailure when the matrix is not positive definite.
class PeriodicBandSolver {
 public:
  explicit PeriodicBandSolver(const PeriodicBandMatrix& a);

  VectorXd solve(const VectorXd& b) const;

 private:
  VectorXd band_solve(const VectorXd& b) const;

  Index n_ = 0;
  Index r_ = 0;
  Index interior_ = 0;
  bool dense_ = false;
  Eigen::LLT<Eigen::MatrixXd> dense_llt_;
  Eigen::MatrixXd chol_;     // interior x (R+1), chol_(i, d) = L(i, i - d)
  Eigen::MatrixXd coupling_; // A11^{-1} A12, interior x R
  Eigen::MatrixXd border_;   // A12, interior x R
  Eigen::LLT<Eigen::MatrixXd> schur_;
};

}  // namespace hqc
