#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hqc/atomistic.hpp"
#include "hqc/hqc.hpp"

namespace hqc {

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double v);
double parse_double(const std::string& s);

/// "# N=<N> p=<p>" then one value per line.
void write_lattice_fn(std::ostream& os, const LatticeFn& u);
LatticeFn read_lattice_fn(std::istream& is);

/// "# N=<N>" then one node per line as a site number 1..N.
void write_mesh(std::ostream& os, const Mesh1D& mesh);
Mesh1D read_mesh(std::istream& is, Index period = 1);

/// Mesh header, then "<site> <value>" per node.
void write_coarse_fn(std::ostream& os, const CoarseFn& u);
CoarseFn read_coarse_fn(std::istream& is, Index period = 1);

/// CSV "iter,residual_dual,step_damping".
void write_trace(std::ostream& os, const std::vector<NewtonStep>& trace);

void save_lattice_fn(const std::string& path, const LatticeFn& u);
LatticeFn load_lattice_fn(const std::string& path);

}  // namespace hqc
