#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hqc {

/// Precondition violated by the caller (bad sizes, zero step, nonzero mean, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An interaction law was evaluated outside its admissible set.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, long site = -1, int range = 0)
      : std::domain_error(what), site_(site), range_(range) {}

  long site() const { return site_; }
  int range() const { return range_; }

 private:
  long site_;
  int range_;
};

/// Iterative solver did not reach its tolerance.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, std::vector<double> trace = {})
      : std::runtime_error(what), trace_(std::move(trace)) {}

  /// Residual history up to the failure.
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// A stability assumption (ordering, nearest-neighbour dominance, definiteness) failed.
class StabilityFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hqc
