#pragma once

#include <cstddef>
#include <vector>

#include "rmt/common.hpp"
#include "rmt/rng.hpp"

namespace rmt {

// Numeric evaluation of the indistinguishability bounds: chi-square estimates for
// the Huber and oblivious constructions, the determinant factoring identity, the
// low-degree likelihood-ratio norm, and the Gaussian-integral oracles behind them.

struct HuberLBConfig {
  std::size_t n = 0;
  std::size_t d = 0;
  double eps = 0.0;
  double alpha = 0.0;
  double K = 100.0;  // good-set size window: |S| in (1-eps)n +- K*sqrt(eps*n)
  std::size_t trials = 100000;
  void validate() const;
};

struct ObliviousLBConfig {
  std::size_t n = 0;
  std::size_t d = 0;
  double eps = 0.0;
  double alpha = 0.0;
  double beta = -1.0;  // < 0 means derive via set_beta
  std::size_t trials = 100000;
  void validate() const;
};

struct LowDegreeConfig {
  std::size_t n = 0;
  std::size_t d = 0;
  double eps = 0.0;
  double alpha = 0.0;
  std::size_t D = 1;       // truncation degree
  double rosenthal_C = 2.0;  // bound-shape constant, not ground truth
  double sphere_c = 2.0;     // same role in the sphere-moment factor
  void validate() const;
};

// Coupling coefficient: the root beta = (1/n)(1 - sqrt(1 - alpha^2 n/(d eps))) of
// beta^2 d eps n^2 - 2 beta d eps n + alpha^2 n = 0, computed in rationalized form.
// Requires alpha^2 n < d eps.
double set_beta(double alpha, double eps, std::size_t n, std::size_t d);
double set_beta(const ObliviousLBConfig& cfg);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

// Factored expression vs direct 4x4 determinant route.
IdentityCheck det_identity_check(double alpha, double beta, double eps, double gamma,
                                 std::size_t n, std::size_t d);

struct Chi2Estimate {
  double estimate = 0.0;
  double stderr_ = 0.0;  // batch-means standard error
  bool diverged = false; // some integrand hit the divergence region
};

// Overlap statistic t for good sets of sizes a, b with y = |(S ∪ T)^c|, in the
// simplified form (alpha^2/eps^2)(y + eps(a+b) - eps(2-eps)n).
double huber_t_statistic(std::size_t y, std::size_t a, std::size_t b, std::size_t n,
                         double alpha, double eps);

Chi2Estimate huber_chi2_estimate(const HuberLBConfig& cfg, RngStream& rng);
Chi2Estimate oblivious_chi2_estimate(const ObliviousLBConfig& cfg, RngStream& rng);

// Exact E[(Y - EY)^m] for Y ~ Binomial(n, p), accumulated over the pmf in one
// pass. Stable for m <= 20.
double binomial_central_moment(std::size_t n, double p, std::size_t m);

enum class LowDegreeMode { ExactMoments, RosenthalBound };

double lowdegree_norm_bound(const LowDegreeConfig& cfg, LowDegreeMode mode);

struct OracleCheck {
  double mc = 0.0;
  double closed_form = 0.0;
  double rel_err = 0.0;
};

// E[exp(-z^T M z / 2)] vs det(I+M)^{-1/2} for symmetric k x k M with eigs > -1.
OracleCheck mgf_det_check(const std::vector<double>& M, std::size_t k,
                          std::size_t samples, RngStream& rng);

// E_{z~N(0,delta^2 I)} exp(-a||z||^2/2 + <s,z>) vs (a delta^2+1)^{-d/2}
// exp(||s||^2 / (2(a + 1/delta^2))).
OracleCheck shifted_gaussian_integral_check(double a, const std::vector<double>& s,
                                            double delta, std::size_t samples,
                                            RngStream& rng);

}  // namespace rmt
