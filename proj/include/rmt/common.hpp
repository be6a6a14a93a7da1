#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmt {

// Caller violated a documented precondition.
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Exact-mode search asked to enumerate past its size cap.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An invariant the algorithms are supposed to guarantee failed at runtime.
class InvariantError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Numeric degeneracy the algorithm cannot proceed from (e.g. a zero-norm vector
// where a direction is required).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad configuration input (files, flags, parameter combinations). CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Experiment-level failure (e.g. too many flagged trials). CLI exit code 3.
class ExperimentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Iterative solver failed to meet its tolerance; carries the best iterate seen.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& msg, double value, std::vector<double> vec,
                   double residual)
      : std::runtime_error(msg), best_value(value), best_vector(std::move(vec)),
        best_residual(residual) {}

  double best_value;
  std::vector<double> best_vector;
  double best_residual;
};

}  // namespace rmt
