#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ldtail {

/// Bad input: violated preconditions, malformed config, mismatched grids.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine that should not fail did (e.g. factorization of an SPD system).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iteration left its contraction regime. Carries the step-size trace so
/// callers can report how it diverged or stalled.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace,
                   double last_residual)
      : std::runtime_error(what),
        trace_(std::move(trace)),
        last_residual_(last_residual) {}

  const std::vector<double>& trace() const noexcept { return trace_; }
  double last_residual() const noexcept { return last_residual_; }

 private:
  std::vector<double> trace_;
  double last_residual_;
};

}  // namespace ldtail
