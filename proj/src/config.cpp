#include "hqc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "hqc/io.hpp"

namespace hqc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long to_int(const std::string& key, const std::string& v) {
  const double d = to_real(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e15) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<double> to_reals(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_real(key, s));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<Index> to_ints(const std::string& key, const std::string& v) {
  std::vector<Index> out;
  for (const auto& s : split_list(v)) out.push_back(to_int(key, s));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"problem", [](auto& c, auto& k, auto& v) {
         if (v != "1d" && v != "2d") throw ConfigError(k + ": expected 1d or 2d");
         c.problem = v;
       }},
      {"lattice.N", [](auto& c, auto& k, auto& v) { c.n = to_int(k, v); }},
      {"potential.kind", [](auto& c, auto& k, auto& v) {
         if (v != "lj" && v != "quadratic") throw ConfigError(k + ": expected lj or quadratic");
         c.potential_kind = v;
       }},
      {"potential.R", [](auto& c, auto& k, auto& v) { c.range = static_cast<int>(to_int(k, v)); }},
      {"potential.l", [](auto& c, auto& k, auto& v) { c.l = to_reals(k, v); }},
      {"potential.k", [](auto& c, auto& k, auto& v) { c.k = to_reals(k, v); }},
      {"potential.a", [](auto& c, auto& k, auto& v) { c.a = to_reals(k, v); }},
      {"force.preset", [](auto& c, auto& k, auto& v) {
         if (v != "sin_1d" && v != "bump_2d") throw ConfigError(k + ": expected sin_1d or bump_2d");
         c.force_preset = v;
       }},
      {"force.amplitude", [](auto& c, auto& k, auto& v) { c.force_amplitude = to_real(k, v); }},
      {"force.phase", [](auto& c, auto& k, auto& v) { c.force_phase = to_real(k, v); }},
      {"mesh.schedule", [](auto& c, auto& k, auto& v) {
         if (v == "adaptive") {
           c.adaptive = true;
           c.schedule.clear();
         } else {
           c.adaptive = false;
           c.schedule = to_ints(k, v);
         }
       }},
      {"mesh.initial", [](auto& c, auto& k, auto& v) { c.adaptive_initial = to_int(k, v); }},
      {"mesh.theta", [](auto& c, auto& k, auto& v) { c.theta = to_real(k, v); }},
      {"mesh.steps", [](auto& c, auto& k, auto& v) { c.adaptive_steps = static_cast<int>(to_int(k, v)); }},
      {"force_functional", [](auto& c, auto& k, auto& v) {
         if (v == "exact_summation") c.force_functional = ForceKind::exact_summation;
         else if (v == "node_lumped") c.force_functional = ForceKind::node_lumped;
         else throw ConfigError(k + ": expected exact_summation or node_lumped");
       }},
      {"solver.tol", [](auto& c, auto& k, auto& v) { c.newton.tol = to_real(k, v); }},
      {"solver.max_iter", [](auto& c, auto& k, auto& v) { c.newton.max_iter = static_cast<int>(to_int(k, v)); }},
      {"solver.damping_max", [](auto& c, auto& k, auto& v) { c.newton.damping_max = static_cast<int>(to_int(k, v)); }},
      {"micro.tol", [](auto& c, auto& k, auto& v) { c.micro.tol = to_real(k, v); }},
      {"micro.max_iter", [](auto& c, auto& k, auto& v) { c.micro.max_iter = static_cast<int>(to_int(k, v)); }},
      {"micro.damping_max", [](auto& c, auto& k, auto& v) { c.micro.damping_max = static_cast<int>(to_int(k, v)); }},
      {"estimator.calibrate", [](auto& c, auto& k, auto& v) { c.calibrate = to_bool(k, v); }},
      {"estimator.c0_inv", [](auto& c, auto& k, auto& v) { c.c0_inv = to_real(k, v); }},
      {"estimator.z_min", [](auto& c, auto& k, auto& v) { c.sample_z_min = to_real(k, v); }},
      {"estimator.z_max", [](auto& c, auto& k, auto& v) { c.sample_z_max = to_real(k, v); }},
      {"table.z_min", [](auto& c, auto& k, auto& v) { c.table_z_min = to_real(k, v); }},
      {"table.z_max", [](auto& c, auto& k, auto& v) { c.table_z_max = to_real(k, v); }},
      {"table.count", [](auto& c, auto& k, auto& v) { c.table_count = static_cast<int>(to_int(k, v)); }},
      {"lattice2d.N", [](auto& c, auto& k, auto& v) { c.n2d = to_int(k, v); }},
      {"model2d.k1", [](auto& c, auto& k, auto& v) { c.model.k1 = to_real(k, v); }},
      {"model2d.k2", [](auto& c, auto& k, auto& v) { c.model.k2 = to_real(k, v); }},
      {"model2d.k3", [](auto& c, auto& k, auto& v) { c.model.k3 = to_real(k, v); }},
      {"mesh2d.t", [](auto& c, auto& k, auto& v) { c.t_schedule = to_ints(k, v); }},
      {"cg.tol", [](auto& c, auto& k, auto& v) { c.cg_tol = to_real(k, v); }},
      {"output.dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"output.timing", [](auto& c, auto& k, auto& v) { c.timing = to_bool(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    it->second(cfg, key, value);
    cfg.entries[key] = value;
  }
  if (cfg.problem == "2d") {
    if (!cfg.entries.count("force.preset")) cfg.force_preset = "bump_2d";
    if (!cfg.entries.count("force.amplitude")) cfg.force_amplitude = 10.0;
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(is);
}

void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  if (c.problem == "1d") {
    const std::size_t p = c.potential_kind == "lj" ? c.l.size() : c.k.size();
    need(c.n >= 2, "lattice.N must be at least 2");
    need(c.range >= 1, "potential.R must be positive");
    need(p >= 1 && c.n % static_cast<Index>(p) == 0, "lattice.N must be a multiple of the species period");
    if (c.potential_kind == "lj") {
      for (double v : c.l) need(v > 0.0, "potential.l entries must be positive");
    } else {
      need(c.a.size() == c.k.size(), "potential.a must have one entry per stiffness");
      need(c.range == 1, "quadratic potentials have R = 1");
      for (double v : c.k) need(v > 0.0, "potential.k entries must be positive");
    }
    need(c.force_preset == "sin_1d", "force.preset must be sin_1d for 1d problems");
    for (Index m : c.schedule)
      need(m >= 2 && m <= c.n && c.n % m == 0, "mesh.schedule entries must divide lattice.N and be at least 2");
    if (c.adaptive) {
      need(c.adaptive_initial >= 2 && c.n % c.adaptive_initial == 0, "mesh.initial must divide lattice.N");
      need(c.theta > 0.0 && c.theta <= 1.0, "mesh.theta must lie in (0, 1]");
      need(c.adaptive_steps >= 1, "mesh.steps must be positive");
    } else {
      need(!c.schedule.empty(), "mesh.schedule is empty");
    }
    need(c.sample_z_max >= c.sample_z_min, "estimator.z_max must not be below estimator.z_min");
    need(c.table_count >= 1 && c.table_z_max >= c.table_z_min, "table range is empty");
    if (c.c0_inv) need(*c.c0_inv >= 0.0, "estimator.c0_inv must be nonnegative");
  } else {
    need(c.n2d >= 2 && c.n2d % 2 == 0, "lattice2d.N must be even");
    need(c.model.k1 > 0.0 && c.model.k2 > 0.0 && c.model.k3 >= 0.0, "model2d stiffnesses must be positive");
    need(c.force_preset == "bump_2d", "force.preset must be bump_2d for 2d problems");
    need(!c.t_schedule.empty(), "mesh2d.t is empty");
    for (Index t : c.t_schedule) need(t >= 2 && c.n2d % t == 0, "mesh2d.t entries must divide lattice2d.N");
  }
  need(c.newton.tol > 0.0 && c.newton.max_iter >= 1 && c.newton.damping_max >= 0, "invalid solver settings");
  need(c.micro.tol > 0.0 && c.micro.max_iter >= 1 && c.micro.damping_max >= 0, "invalid micro settings");
  need(c.cg_tol > 0.0, "cg.tol must be positive");
}

PotentialFamily make_family(const ExperimentConfig& cfg) {
  if (cfg.potential_kind == "lj") return lj_family(cfg.l, cfg.range);
  return quadratic_family(cfg.k, cfg.a);
}

LatticeFn make_force_1d(const ExperimentConfig& cfg, double* removed) {
  const Index p = static_cast<Index>(cfg.potential_kind == "lj" ? cfg.l.size() : cfg.k.size());
  const LatticeGrid grid(cfg.n, p);
  const double amp = cfg.force_amplitude, phase = cfg.force_phase;
  const LatticeFn f =
      LatticeFn::sample(grid, [&](double x) { return amp * std::sin(phase + 2.0 * std::numbers::pi * x); });
  auto [f0, m] = make_zero_mean_force(f);
  if (removed) *removed = m;
  return f0;
}

Displacement2D make_force_2d(const ExperimentConfig& cfg) { return bump_force_2d(cfg.n2d, cfg.force_amplitude); }

std::uint64_t reference_hash(const ExperimentConfig& c) {
  std::ostringstream ss;
  ss << "problem=" << c.problem << ';';
  if (c.problem == "1d") {
    ss << "N=" << c.n << ";kind=" << c.potential_kind << ";R=" << c.range << ';';
    const auto list = [&](const char* name, const std::vector<double>& v) {
      ss << name << '=';
      for (double x : v) ss << format_double(x) << ',';
      ss << ';';
    };
    if (c.potential_kind == "lj") {
      list("l", c.l);
    } else {
      list("k", c.k);
      list("a", c.a);
    }
    ss << "phase=" << format_double(c.force_phase) << ';';
    ss << "tol=" << format_double(c.newton.tol) << ";max_iter=" << c.newton.max_iter
       << ";damping=" << c.newton.damping_max << ';';
  } else {
    ss << "N=" << c.n2d << ";k1=" << format_double(c.model.k1) << ";k2=" << format_double(c.model.k2)
       << ";k3=" << format_double(c.model.k3) << ";cg=" << format_double(c.cg_tol) << ';';
  }
  ss << "preset=" << c.force_preset << ";amp=" << format_double(c.force_amplitude) << ';';
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : ss.str()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace hqc
