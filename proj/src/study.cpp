#include "hqc/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hqc/io.hpp"
#include "hqc/parallel.hpp"

namespace hqc {

namespace fs = std::filesystem;

double column_value(const StudyRow& r, std::string_view c) {
  if (c == "h_max") return r.h_max;
  if (c == "dof") return static_cast<double>(r.dof);
  if (c == "err_1inf") return r.err_1inf;
  if (c == "err_0inf") return r.err_0inf;
  if (c == "eta_jump") return r.eta_jump;
  if (c == "eta_force") return r.eta_force;
  if (c == "eta_quad") return r.eta_quad;
  if (c == "eta_total") return r.eta_total;
  if (c == "newton_iters") return static_cast<double>(r.newton_iters);
  if (c == "wall_ms") return r.wall_ms;
  throw InvalidArgument("unknown column '" + std::string(c) + "'");
}

void write_csv(std::ostream& os, const std::vector<StudyRow>& rows) {
  for (std::size_t i = 0; i < kStudyColumns.size(); ++i) os << (i ? "," : "") << kStudyColumns[i];
  os << '\n';
  for (const StudyRow& r : rows) {
    os << format_double(r.h_max) << ',' << r.dof << ',' << format_double(r.err_1inf) << ','
       << format_double(r.err_0inf) << ',' << format_double(r.eta_jump) << ',' << format_double(r.eta_force) << ','
       << format_double(r.eta_quad) << ',' << format_double(r.eta_total) << ',' << r.newton_iters << ','
       << format_double(r.wall_ms) << '\n';
  }
}

std::vector<StudyRow> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("read_csv: empty input");
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != kStudyColumns.size()) throw InvalidArgument("read_csv: expected 10 columns");
    StudyRow r;
    r.h_max = parse_double(cells[0]);
    r.dof = std::stol(cells[1]);
    r.err_1inf = parse_double(cells[2]);
    r.err_0inf = parse_double(cells[3]);
    r.eta_jump = parse_double(cells[4]);
    r.eta_force = parse_double(cells[5]);
    r.eta_quad = parse_double(cells[6]);
    r.eta_total = parse_double(cells[7]);
    r.newton_iters = std::stol(cells[8]);
    r.wall_ms = parse_double(cells[9]);
    rows.push_back(r);
  }
  return rows;
}

double fit_slope(const std::vector<StudyRow>& rows, std::string_view column) {
  if (rows.size() < 3) throw InvalidArgument("fit_slope: need at least three rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const StudyRow& r : rows) {
    const double v = column_value(r, column);
    if (!(v > 0.0) || !(r.h_max > 0.0)) throw InvalidArgument("fit_slope: values must be positive");
    const double x = std::log(r.h_max), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw InvalidArgument("fit_slope: h_max values must not all coincide");
  return (n * sxy - sx * sy) / den;
}

void write_svg(std::ostream& os, const std::vector<StudyRow>& rows, const std::string& title) {
  static const std::array<std::string_view, 6> series{"err_1inf", "err_0inf", "eta_jump",
                                                      "eta_force", "eta_quad", "eta_total"};
  static const std::array<const char*, 6> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  const double w = 640, h = 480, ml = 70, mr = 150, mt = 40, mb = 50;

  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  for (const StudyRow& r : rows) {
    if (!(r.h_max > 0)) continue;
    xmin = std::min(xmin, std::log10(r.h_max));
    xmax = std::max(xmax, std::log10(r.h_max));
    for (auto c : series) {
      const double v = column_value(r, c);
      if (v > 0) {
        ymin = std::min(ymin, std::log10(v));
        ymax = std::max(ymax, std::log10(v));
      }
    }
  }
  if (!(xmax >= xmin)) xmin = -1, xmax = 0;
  if (!(ymax >= ymin)) ymin = -1, ymax = 0;
  xmin = std::floor(xmin), xmax = std::ceil(xmax), ymin = std::floor(ymin), ymax = std::ceil(ymax);
  if (xmax == xmin) xmax += 1;
  if (ymax == ymin) ymax += 1;
  auto px = [&](double lx) { return ml + (lx - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double ly) { return h - mb - (ly - ymin) / (ymax - ymin) * (h - mt - mb); };
  char buf[256];

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";
  for (double d = xmin; d <= xmax + 0.5; d += 1) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e%d</text>\n",
                  px(d), py(ymin), px(d), py(ymax), px(d), h - mb + 18, static_cast<int>(d));
    os << buf;
  }
  for (double d = ymin; d <= ymax + 0.5; d += 1) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e%d</text>\n",
                  px(xmin), py(d), px(xmax), py(d), ml - 6, py(d) + 4, static_cast<int>(d));
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n", ml, mt,
                w - ml - mr, h - mt - mb);
  os << buf;
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">h_max</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string pts;
    for (const StudyRow& r : rows) {
      const double v = column_value(r, series[s]);
      if (!(v > 0 && r.h_max > 0)) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(std::log10(r.h_max)), py(std::log10(v)));
      pts += buf;
    }
    if (pts.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << colors[s] << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" fill=\"%s\" font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                  w - mr + 10, mt + 16.0 * (static_cast<double>(s) + 1), colors[s], std::string(series[s]).c_str());
    os << buf;
  }
  os << "</svg>\n";
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

fs::path cache_path(const StudyOptions& opt, const ExperimentConfig& cfg, const char* tag) {
  return fs::path(opt.out_dir.empty() ? "." : opt.out_dir) / "cache" / (std::string(tag) + "-" + hex(reference_hash(cfg)) + ".txt");
}

Index species_period(const ExperimentConfig& cfg) {
  return static_cast<Index>(cfg.potential_kind == "lj" ? cfg.l.size() : cfg.k.size());
}

void write_outputs(StudyResult& res, const StudyOptions& opt, const std::string& stem, const std::string& title) {
  const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
  fs::create_directories(dir);
  res.csv_path = (dir / (stem + ".csv")).string();
  res.svg_path = (dir / (stem + ".svg")).string();
  std::ofstream csv(res.csv_path);
  write_csv(csv, res.rows);
  std::ofstream svg(res.svg_path);
  write_svg(svg, res.rows, title);
  if (!csv || !svg) throw std::runtime_error("cannot write study outputs to " + dir.string());
}

}  // namespace

EquilibriumSolution reference_solution_1d(const ExperimentConfig& cfg, const StudyOptions& opt) {
  const PotentialFamily family = make_family(cfg);
  const LatticeGrid grid(cfg.n, species_period(cfg));
  const LatticeFn f = make_force_1d(cfg);
  const AtomisticProblem prob(grid, family, f);
  const fs::path path = cache_path(opt, cfg, "ref1d");

  if (opt.use_cache && fs::exists(path)) {
    LatticeFn u = load_lattice_fn(path.string());
    if (u.grid() == grid) {
      EquilibriumSolution sol;
      const LatticeSystem sys = energy_grad_hess(prob, u);
      sol.residual_dual = dual_seminorm_neg1(project_zero_mean(sys.gradient - f));
      sol.u = std::move(u);
      if (sol.residual_dual <= cfg.newton.tol) return sol;
    }
  }
  const Microstructure micro = ground_microstructure(family, cfg.micro);
  EquilibriumSolution sol = solve_atomistic(prob, lift_microstructure(grid, micro.chi_star), cfg.newton);
  fs::create_directories(path.parent_path());
  save_lattice_fn(path.string(), sol.u);
  return sol;
}

Displacement2D reference_solution_2d(const ExperimentConfig& cfg, const StudyOptions& opt) {
  const Index n = cfg.n2d;
  const fs::path path = cache_path(opt, cfg, "ref2d");
  if (opt.use_cache && fs::exists(path)) {
    std::ifstream is(path);
    std::string head;
    std::getline(is, head);
    Eigen::MatrixXd v(n * n, 2);
    Index i = 0;
    std::string a, b;
    while (i < n * n && is >> a >> b) {
      v(i, 0) = parse_double(a);
      v(i, 1) = parse_double(b);
      ++i;
    }
    if (i == n * n && head == "# N1=" + std::to_string(n) + " N2=" + std::to_string(n)) return Displacement2D(n, n, v);
  }
  const Solve2DResult sol = solve_atomistic2d(cfg.model, make_force_2d(cfg), CGSettings{cfg.cg_tol});
  fs::create_directories(path.parent_path());
  std::ofstream os(path);
  os << "# N1=" << n << " N2=" << n << '\n';
  for (Index r = 0; r < n * n; ++r)
    os << format_double(sol.u.values()(r, 0)) << ' ' << format_double(sol.u.values()(r, 1)) << '\n';
  return sol.u;
}

StudyResult run_study(const ExperimentConfig& cfg, const StudyOptions& opt) {
  if (cfg.problem != "1d") throw InvalidArgument("run_study: 1d configuration expected");
  const PotentialFamily family = make_family(cfg);
  const Microstructure micro = ground_microstructure(family, cfg.micro);
  const Constants consts = estimate_constants(family, micro, cfg.sample_z_min, cfg.sample_z_max);
  if (!(consts.c0_lower > 0.0))
    throw StabilityFailure("nearest-neighbour dominance fails: margin " + format_double(consts.c0_lower));
  const double c0_inv = cfg.c0_inv ? *cfg.c0_inv : 1.0 / consts.c0_lower;

  const LatticeGrid grid(cfg.n, species_period(cfg));
  const LatticeFn f = make_force_1d(cfg);
  const ForceFunctional force{cfg.force_functional, f};
  const EquilibriumSolution ref = reference_solution_1d(cfg, opt);
  const HomogenizedLaw pristine(family, cfg.micro);

  auto compute = [&](const Mesh1D& mesh, StudyRow& row, ErrorReport& rep) {
    const auto t0 = std::chrono::steady_clock::now();
    // A private law per row keeps every row independent of scheduling.
    const HomogenizedLaw law(pristine);
    NewtonSettings ns = cfg.newton;
    ns.threads = 1;
    const CoarseSolution cs = solve_coarse(law, mesh, force, std::nullopt, ns);
    const LatticeFn uc = corrector(law, cs.u);
    const LatticeFn d = uc - ref.u;
    rep = indicator_terms(cs.u, f, force, 1.0, c0_inv);
    row.h_max = mesh.h_max();
    row.dof = static_cast<long>(mesh.num_nodes());
    row.err_1inf = seminorm(d, 1, kInf);
    row.err_0inf = norm(d, kInf);
    row.eta_jump = rep.jump_term;
    row.eta_force = rep.force_term;
    row.eta_quad = rep.quadrature_term;
    row.newton_iters = cs.iterations;
    if (cfg.timing)
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  StudyResult res;
  if (!cfg.adaptive) {
    const std::size_t n = cfg.schedule.size();
    res.rows.resize(n);
    res.reports.resize(n);
    parallel_for(static_cast<Index>(n), opt.threads, [&](Index i) {
      const auto k = static_cast<std::size_t>(i);
      compute(Mesh1D::uniform(grid, cfg.schedule[k]), res.rows[k], res.reports[k]);
    });
  } else {
    Mesh1D mesh = Mesh1D::uniform(grid, cfg.adaptive_initial);
    for (int step = 0; step < cfg.adaptive_steps; ++step) {
      res.rows.emplace_back();
      res.reports.emplace_back();
      compute(mesh, res.rows.back(), res.reports.back());
      Mesh1D next = adapt_mesh(mesh, res.reports.back(), cfg.theta);
      if (next == mesh) break;
      mesh = std::move(next);
    }
  }

  double calib = 1.0;
  if (cfg.calibrate && !res.rows.empty()) {
    std::size_t coarsest = 0;
    for (std::size_t i = 1; i < res.rows.size(); ++i)
      if (res.rows[i].h_max > res.rows[coarsest].h_max) coarsest = i;
    calib = fit_calibration(res.reports[coarsest], res.rows[coarsest].err_1inf);
  }
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    res.reports[i].calibration_constant = calib;
    res.reports[i].recompute_total();
    res.rows[i].eta_total = res.reports[i].total;
  }
  write_outputs(res, opt, "study", "1d convergence");
  return res;
}

StudyResult run_study_2d(const ExperimentConfig& cfg, const StudyOptions& opt) {
  if (cfg.problem != "2d") throw InvalidArgument("run_study_2d: 2d configuration expected");
  const Homogenized2D hom = homogenize2d(cfg.model);
  const Displacement2D f = make_force_2d(cfg);
  const Displacement2D ref = reference_solution_2d(cfg, opt);

  StudyResult res;
  res.rows.resize(cfg.t_schedule.size());
  parallel_for(static_cast<Index>(cfg.t_schedule.size()), opt.threads, [&](Index i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Index t = cfg.t_schedule[static_cast<std::size_t>(i)];
    const Coarse2DResult c = solve_coarse2d(cfg.model, hom, f, t);
    StudyRow& row = res.rows[static_cast<std::size_t>(i)];
    row.h_max = 1.0 / static_cast<double>(t);
    row.dof = static_cast<long>(2 * t * t);
    row.err_1inf = gradient_error(c.u_corrected, ref);
    row.err_0inf = (c.u_corrected.values() - ref.values()).cwiseAbs().maxCoeff();
    row.newton_iters = 1;
    if (cfg.timing)
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  });
  write_outputs(res, opt, "study2d", "2d convergence");
  return res;
}

}  // namespace hqc
