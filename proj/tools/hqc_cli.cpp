// hqc command line: atomistic / coarse solves, micro tables, estimates,
// convergence studies and assumption checks driven by a flat config file.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hqc/config.hpp"
#include "hqc/estimator.hpp"
#include "hqc/io.hpp"
#include "hqc/study.hpp"

namespace fs = std::filesystem;
using namespace hqc;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kSolver = 3, kStability = 4 };

struct Common {
  std::string config;
  std::string out;
  int threads = 1;
  bool no_cache = false;
};

std::string out_dir(const Common& c, const ExperimentConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("HQC_OUT_DIR"); env && *env) return env;
  return "out";
}

ExperimentConfig load(const Common& c) {
  if (c.config.empty()) return ExperimentConfig{};
  return load_config(c.config);
}

StudyOptions options(const Common& c, const ExperimentConfig& cfg) {
  return {out_dir(c, cfg), c.threads, !c.no_cache};
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / name);
  if (!os) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
  return os;
}

void require_1d(const ExperimentConfig& cfg) {
  if (cfg.problem != "1d") throw ConfigError("this command needs problem = 1d");
}

Mesh1D first_mesh(const ExperimentConfig& cfg, const LatticeGrid& grid) {
  return Mesh1D::uniform(grid, cfg.adaptive ? cfg.adaptive_initial : cfg.schedule.front());
}

int cmd_solve_atomistic(const Common& c) {
  const ExperimentConfig cfg = load(c);
  require_1d(cfg);
  const StudyOptions opt = options(c, cfg);
  const PotentialFamily family = make_family(cfg);
  double removed = 0.0;
  const LatticeFn f = make_force_1d(cfg, &removed);
  const LatticeGrid grid = f.grid();
  const Microstructure micro = ground_microstructure(family, cfg.micro);
  const AtomisticProblem prob(grid, family, f);
  const EquilibriumSolution sol = solve_atomistic(prob, lift_microstructure(grid, micro.chi_star), cfg.newton);
  auto os = open_out(opt.out_dir, "atomistic.txt");
  write_lattice_fn(os, sol.u);
  auto tr = open_out(opt.out_dir, "atomistic_trace.csv");
  write_trace(tr, sol.trace);
  std::printf("atomistic: N=%ld iterations=%d residual=%s removed_mean=%s\n", static_cast<long>(grid.size()),
              sol.iterations, format_double(sol.residual_dual).c_str(), format_double(removed).c_str());
  return kOk;
}

int cmd_solve_hqc(const Common& c) {
  const ExperimentConfig cfg = load(c);
  require_1d(cfg);
  const StudyOptions opt = options(c, cfg);
  const HomogenizedLaw law(make_family(cfg), cfg.micro);
  const LatticeFn f = make_force_1d(cfg);
  const Mesh1D mesh = first_mesh(cfg, f.grid());
  NewtonSettings ns = cfg.newton;
  ns.threads = c.threads;
  const CoarseSolution cs = solve_coarse(law, mesh, {cfg.force_functional, f}, std::nullopt, ns);
  const LatticeFn uc = corrector(law, cs.u);
  auto os = open_out(opt.out_dir, "coarse.txt");
  write_coarse_fn(os, cs.u);
  auto oc = open_out(opt.out_dir, "corrected.txt");
  write_lattice_fn(oc, uc);
  auto tr = open_out(opt.out_dir, "coarse_trace.csv");
  write_trace(tr, cs.trace);
  std::printf("hqc: nodes=%ld iterations=%d residual=%s\n", static_cast<long>(mesh.num_nodes()), cs.iterations,
              format_double(cs.residual_dual).c_str());
  return kOk;
}

int cmd_micro(const Common& c) {
  const ExperimentConfig cfg = load(c);
  require_1d(cfg);
  const StudyOptions opt = options(c, cfg);
  const HomogenizedLaw law(make_family(cfg), cfg.micro);
  auto os = open_out(opt.out_dir, "micro.csv");
  os << "z,phi0,dphi0,d2phi0\n";
  for (int i = 0; i < cfg.table_count; ++i) {
    const double z = cfg.table_count == 1
                         ? cfg.table_z_min
                         : cfg.table_z_min + (cfg.table_z_max - cfg.table_z_min) * i / (cfg.table_count - 1);
    const HomogenizedValue v = law.eval(z);
    os << format_double(z) << ',' << format_double(v.phi0) << ',' << format_double(v.dphi0) << ','
       << format_double(v.d2phi0) << '\n';
  }
  std::printf("micro: %d strains tabulated\n", cfg.table_count);
  return kOk;
}

int cmd_estimate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  require_1d(cfg);
  const StudyOptions opt = options(c, cfg);
  const PotentialFamily family = make_family(cfg);
  const Microstructure micro = ground_microstructure(family, cfg.micro);
  const Constants k = estimate_constants(family, micro, cfg.sample_z_min, cfg.sample_z_max);
  if (!(k.c0_lower > 0.0)) throw StabilityFailure("nearest-neighbour dominance fails");
  const HomogenizedLaw law(family, cfg.micro);
  const LatticeFn f = make_force_1d(cfg);
  const Mesh1D mesh = first_mesh(cfg, f.grid());
  const ForceFunctional force{cfg.force_functional, f};
  const CoarseSolution cs = solve_coarse(law, mesh, force, std::nullopt, cfg.newton);
  const ErrorReport rep = indicator_terms(cs.u, f, force, 1.0, cfg.c0_inv ? *cfg.c0_inv : 1.0 / k.c0_lower);
  auto os = open_out(opt.out_dir, "estimate.csv");
  os << "h_max,jump_term,force_term,quadrature_term,total\n"
     << format_double(mesh.h_max()) << ',' << format_double(rep.jump_term) << ',' << format_double(rep.force_term)
     << ',' << format_double(rep.quadrature_term) << ',' << format_double(rep.total) << '\n';
  std::printf("estimate: C11=%s c0_lower=%s total=%s\n", format_double(k.c11_sampled).c_str(),
              format_double(k.c0_lower).c_str(), format_double(rep.total).c_str());
  return kOk;
}

void print_slopes(const StudyResult& res) {
  for (const char* col : {"err_1inf", "err_0inf", "eta_total"}) {
    try {
      std::printf("slope %s = %.4f\n", col, fit_slope(res.rows, col));
    } catch (const InvalidArgument&) {
    }
  }
  std::printf("wrote %s and %s\n", res.csv_path.c_str(), res.svg_path.c_str());
}

int cmd_study(const Common& c) {
  const ExperimentConfig cfg = load(c);
  require_1d(cfg);
  print_slopes(run_study(cfg, options(c, cfg)));
  return kOk;
}

int cmd_study2d(const Common& c) {
  ExperimentConfig cfg = load(c);
  if (c.config.empty()) {
    cfg.problem = "2d";
    cfg.force_preset = "bump_2d";
    cfg.force_amplitude = 10.0;
  }
  if (cfg.problem != "2d") throw ConfigError("study2d needs problem = 2d");
  print_slopes(run_study_2d(cfg, options(c, cfg)));
  return kOk;
}

int cmd_check(const Common& c) {
  const ExperimentConfig cfg = load(c);
  require_1d(cfg);
  const PotentialFamily family = make_family(cfg);
  const Microstructure micro = ground_microstructure(family, cfg.micro);
  const double margin = nn_dominance_margin(family, micro);
  const HomogenizedLaw law(family, cfg.micro);
  const double d2 = law.eval(0.0).d2phi0;
  std::printf("chi_star:");
  for (Index y = 0; y < micro.chi_star.period(); ++y) std::printf(" %s", format_double(micro.chi_star[y]).c_str());
  std::printf("\n");
  std::printf("ordered (y + chi_star increasing): %s\n", micro.ordered ? "yes" : "no");
  std::printf("cell residual: %s\n", format_double(micro.residual).c_str());
  std::printf("|chi_star|_inf <= (p-1)/2: %s\n", micro.within_bound ? "yes" : "no");
  std::printf("nearest-neighbour dominance margin: %s\n", format_double(margin).c_str());
  std::printf("d2phi0(0): %s\n", format_double(d2).c_str());
  if (!micro.ordered || !(margin > 0.0) || !(d2 > 0.0)) {
    std::printf("check: FAILED\n");
    return kStability;
  }
  std::printf("check: ok\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogenized quasicontinuum solver for periodic multilattices"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Configuration file (key = value)");
    sub->add_option("--out", common.out, "Output directory (default: $HQC_OUT_DIR or ./out)");
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--no-cache", common.no_cache, "Recompute the atomistic reference");
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Common&);
  };
  const Command commands[] = {
      {"solve-atomistic", "Solve the full atomistic problem", cmd_solve_atomistic},
      {"solve-hqc", "Coarse homogenized solve on the first mesh of the schedule, with corrector", cmd_solve_hqc},
      {"micro", "Tabulate Phi0 and its derivatives over a strain grid", cmd_micro},
      {"estimate", "A posteriori indicator terms on the first mesh", cmd_estimate},
      {"study", "1d convergence study (CSV + SVG)", cmd_study},
      {"study2d", "2d spring-lattice convergence study (CSV + SVG)", cmd_study2d},
      {"check", "Microstructure and stability diagnostics", cmd_check},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    add_common(sub);
    subs.emplace_back(sub, &cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfig;
  }

  try {
    for (auto& [sub, cmd] : subs)
      if (sub->parsed()) return cmd->run(common);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const StabilityFailure& e) {
    std::fprintf(stderr, "stability failure: %s\n", e.what());
    return kStability;
  } catch (const SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolver;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "solver failure (inadmissible state): %s\n", e.what());
    return kSolver;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
