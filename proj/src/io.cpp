#include "hqc/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hqc {

namespace {

// Parses "# key=value key=value" and returns the value for key, or -1.
long header_value(const std::string& line, const std::string& key) {
  std::istringstream ss(line);
  std::string tok;
  ss >> tok;
  if (tok != "#") return -1;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos && tok.substr(0, eq) == key) return std::stol(tok.substr(eq + 1));
  }
  return -1;
}

std::string read_header(std::istream& is, const char* what) {
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) return line;
  throw InvalidArgument(std::string(what) + ": missing header");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + s + "'");
  }
  if (s.find_first_not_of(" \t\r", pos) != std::string::npos) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

void write_lattice_fn(std::ostream& os, const LatticeFn& u) {
  os << "# N=" << u.grid().size() << " p=" << u.grid().period() << '\n';
  for (Index i = 0; i < u.size(); ++i) os << format_double(u[i]) << '\n';
}

LatticeFn read_lattice_fn(std::istream& is) {
  const std::string head = read_header(is, "read_lattice_fn");
  const long n = header_value(head, "N");
  const long p = header_value(head, "p");
  if (n < 2 || p < 1) throw InvalidArgument("read_lattice_fn: bad header '" + head + "'");
  LatticeFn u(LatticeGrid(n, p));
  std::string line;
  Index i = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (i >= n) throw InvalidArgument("read_lattice_fn: too many values");
    u[i++] = parse_double(line);
  }
  if (i != n) throw InvalidArgument("read_lattice_fn: expected " + std::to_string(n) + " values");
  return u;
}

void write_mesh(std::ostream& os, const Mesh1D& mesh) {
  os << "# N=" << mesh.grid().size() << '\n';
  for (Index s : mesh.nodes()) os << s + 1 << '\n';
}

Mesh1D read_mesh(std::istream& is, Index period) {
  const std::string head = read_header(is, "read_mesh");
  const long n = header_value(head, "N");
  if (n < 2) throw InvalidArgument("read_mesh: bad header '" + head + "'");
  std::vector<Index> nodes;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long site = 0;
    if (!(ss >> site)) throw InvalidArgument("read_mesh: bad line '" + line + "'");
    nodes.push_back(site - 1);
  }
  return Mesh1D(LatticeGrid(n, period), std::move(nodes));
}

void write_coarse_fn(std::ostream& os, const CoarseFn& u) {
  os << "# N=" << u.mesh().grid().size() << '\n';
  for (Index j = 0; j < u.mesh().num_nodes(); ++j)
    os << u.mesh().left(j) + 1 << ' ' << format_double(u.nodal()[j]) << '\n';
}

CoarseFn read_coarse_fn(std::istream& is, Index period) {
  const std::string head = read_header(is, "read_coarse_fn");
  const long n = header_value(head, "N");
  if (n < 2) throw InvalidArgument("read_coarse_fn: bad header '" + head + "'");
  std::vector<Index> nodes;
  std::vector<double> vals;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long site = 0;
    std::string v;
    if (!(ss >> site >> v)) throw InvalidArgument("read_coarse_fn: bad line '" + line + "'");
    nodes.push_back(site - 1);
    vals.push_back(parse_double(v));
  }
  Mesh1D mesh(LatticeGrid(n, period), std::move(nodes));
  return CoarseFn(std::move(mesh), Eigen::Map<const VectorXd>(vals.data(), static_cast<Index>(vals.size())));
}

void write_trace(std::ostream& os, const std::vector<NewtonStep>& trace) {
  os << "iter,residual_dual,step_damping\n";
  for (const NewtonStep& s : trace)
    os << s.iter << ',' << format_double(s.residual_dual) << ',' << format_double(s.damping) << '\n';
}

void save_lattice_fn(const std::string& path, const LatticeFn& u) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_lattice_fn(os, u);
}

LatticeFn load_lattice_fn(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_lattice_fn(is);
}

}  // namespace hqc
