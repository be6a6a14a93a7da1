#pragma once

#include <cstddef>
#include <vector>

#include "rmt/kernels.hpp"
#include "rmt/rng.hpp"

namespace rmt {

struct SingularPair {
  double value = 0.0;         // |lambda| of the magnitude-dominant eigenvalue
  double signed_value = 0.0;  // Rayleigh quotient at the returned vector
  std::vector<double> vector; // unit vector
  std::size_t iterations = 0;
  double residual = 0.0;      // ||A v - signed_value * v||
};

// Magnitude-dominant eigenpair of dense symmetric A (k x k) by power iteration with
// Rayleigh-quotient sign recovery, random unit start from rng. Success means
// ||A v - lambda v|| <= tol * ||A||_F. On non-convergence throws ConvergenceError
// carrying the best iterate seen. A zero matrix returns (0, start vector) at once.
SingularPair top_singular_pair(const std::vector<double>& A, std::size_t k,
                               RngStream& rng, double tol = 1e-8,
                               std::size_t max_iter = 1000);

// Non-throwing variant for filter loops: best iterate after at most max_iter steps.
// The Rayleigh quotient of a unit vector never exceeds ||A||_2 in magnitude, so the
// returned value is a safe (under-)estimate of the spectral norm.
SingularPair spectral_norm_estimate(const std::vector<double>& A, std::size_t k,
                                    RngStream& rng, double tol = 1e-6,
                                    std::size_t max_iter = 300);

}  // namespace rmt
