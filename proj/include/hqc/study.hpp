#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hqc/config.hpp"
#include "hqc/estimator.hpp"

namespace hqc {

struct StudyRow {
  double h_max = 0.0;
  long dof = 0;
  double err_1inf = 0.0;
  double err_0inf = 0.0;
  double eta_jump = 0.0;
  double eta_force = 0.0;
  double eta_quad = 0.0;
  double eta_total = 0.0;
  long newton_iters = 0;
  double wall_ms = 0.0;

  bool operator==(const StudyRow&) const = default;
};

inline constexpr std::array<std::string_view, 10> kStudyColumns{
    "h_max", "dof", "err_1inf", "err_0inf", "eta_jump", "eta_force", "eta_quad", "eta_total", "newton_iters", "wall_ms"};

double column_value(const StudyRow& row, std::string_view column);

void write_csv(std::ostream& os, const std::vector<StudyRow>& rows);
std::vector<StudyRow> read_csv(std::istream& is);

/// Least-squares slope of log(column) against log(h_max).
double fit_slope(const std::vector<StudyRow>& rows, std::string_view column);

/// Log-log plot of the error and indicator columns against h_max.
void write_svg(std::ostream& os, const std::vector<StudyRow>& rows, const std::string& title);

struct StudyOptions {
  std::string out_dir;
  int threads = 1;
  bool use_cache = true;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<ErrorReport> reports;
  std::string csv_path;
  std::string svg_path;
};

/// Atomistic reference, computed once and cached on disk under out_dir/cache.
EquilibriumSolution reference_solution_1d(const ExperimentConfig& cfg, const StudyOptions& opt);
Displacement2D reference_solution_2d(const ExperimentConfig& cfg, const StudyOptions& opt);

/// Convergence study over the mesh schedule (or adaptive loop). Throws
/// StabilityFailure when nearest-neighbour dominance fails.
StudyResult run_study(const ExperimentConfig& cfg, const StudyOptions& opt);
StudyResult run_study_2d(const ExperimentConfig& cfg, const StudyOptions& opt);

}  // namespace hqc
