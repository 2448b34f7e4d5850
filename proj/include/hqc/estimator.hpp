#pragma once

#include <vector>

#include "hqc/hqc.hpp"

namespace hqc {

struct ErrorReport {
  double jump_term = 0.0;
  double force_term = 0.0;
  double quadrature_term = 0.0;
  double calibration_constant = 1.0;
  double c0_inv = 1.0;
  double total = 0.0;
  /// Indexed by element: mean of the strain jumps at its two end nodes.
  std::vector<double> per_element_jumps;

  void recompute_total() { total = calibration_constant * jump_term + c0_inv * force_term + quadrature_term; }
};

/// Strain jumps at nodes, ||(h - eps) f||_inf and the coarse dual norm of F^h - f.
ErrorReport indicator_terms(const CoarseFn& u0h, const LatticeFn& f, const ForceFunctional& force,
                            double calibration_constant = 1.0, double c0_inv = 1.0);

struct Constants {
  double c11_sampled;
  double c0_lower;
};

/// Sampled max_y sum_r r max_z |d2 Phi_r| over [z_min, z_max] and the
/// nearest-neighbour dominance margin as a coercivity bound.
Constants estimate_constants(const PotentialFamily& family, const Microstructure& micro, double z_min = -0.1,
                             double z_max = 0.1, int samples = 201);

/// Constant making calibration * jump + c0_inv * force + quad equal to err
/// (never negative).
double fit_calibration(const ErrorReport& report, double err);

/// Dorfler marking on per_element_jumps: the fewest elements whose indicators
/// reach theta of the total are bisected at the site nearest their midpoint
/// (lower one on ties). Single-site elements are kept.
Mesh1D adapt_mesh(const Mesh1D& mesh, const ErrorReport& report, double theta);

}  // namespace hqc
