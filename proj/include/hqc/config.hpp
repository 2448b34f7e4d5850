#pragma once

// Flat "key = value" experiment configuration with dotted section names.
// Lines starting with '#' are comments; lists are comma separated.

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hqc/atomistic.hpp"
#include "hqc/hqc.hpp"
#include "hqc/lattice2d.hpp"

namespace hqc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string problem = "1d";

  // 1d
  Index n = 4096;
  std::string potential_kind = "lj";
  int range = 3;
  std::vector<double> l{1.0, 1.125};
  std::vector<double> k{1.0, 2.0};
  std::vector<double> a{0.0, 0.0};

  std::string force_preset = "sin_1d";
  double force_amplitude = 50.0;
  double force_phase = 1.0;

  /// Node counts of uniform meshes; empty when adaptive.
  std::vector<Index> schedule{4, 8, 16, 32, 64, 128, 256, 512, 1024};
  bool adaptive = false;
  Index adaptive_initial = 4;
  double theta = 0.5;
  int adaptive_steps = 8;
  ForceKind force_functional = ForceKind::exact_summation;

  NewtonSettings newton;
  CellSettings micro;

  bool calibrate = true;
  std::optional<double> c0_inv;
  double sample_z_min = -0.1;
  double sample_z_max = 0.1;

  // micro tabulation
  double table_z_min = -0.05;
  double table_z_max = 0.05;
  int table_count = 21;

  // 2d
  Index n2d = 256;
  SpringModel2D model{1.0, 2.0, 0.25};
  std::vector<Index> t_schedule{4, 8, 16, 32, 64};
  double cg_tol = 1e-10;

  std::string output_dir;
  bool timing = false;
  std::uint64_t seed = 1;

  /// Raw key/value pairs as read, for hashing.
  std::map<std::string, std::string> entries;
};

/// Throws ConfigError on unknown keys, malformed values or violated preconditions.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

PotentialFamily make_family(const ExperimentConfig& cfg);
/// Zero-mean force for the 1d problem; `removed` receives the subtracted mean.
LatticeFn make_force_1d(const ExperimentConfig& cfg, double* removed = nullptr);
Displacement2D make_force_2d(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of the entries that determine the atomistic reference.
std::uint64_t reference_hash(const ExperimentConfig& cfg);

}  // namespace hqc
