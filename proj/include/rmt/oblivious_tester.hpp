#pragma once

#include <cstddef>
#include <vector>

#include "rmt/dataset.hpp"
#include "rmt/rng.hpp"

namespace rmt {

// Sum+Variance tester: reject when the norm of the sample sum strays from nd, or
// (below the sample-size gate) when the per-point variance along the sum direction
// is inflated. Thresholds use n = data.n() and d = data.d(), so running the tester
// on a filter's survivor set automatically rescales to the surviving count.

struct SumVarianceStats {
  double sum_norm_sq = 0.0;    // ||S||^2, S = sum of all rows
  double mean_dev = 0.0;       // ||S||^2 - n d
  double variance_stat = 0.0;  // (1/n) Sum_i ((<X_i,S> - d)/||S||)^2; 0 if skipped
  bool gate_active = false;    // n <= gate_const * kappa^5 (sqrt(d)/a^2 + d eps/a^2)
};

// Decision rule, in order:
//   REJECT if |mean_dev| > 0.01 alpha^2 n^2;
//   else REJECT if variance_stat >= 1 + 0.025 (alpha^4/eps)(n/d) and the gate holds;
//   else ACCEPT.
// The variance statistic is only computed when the mean check passes, in one fused
// pass reusing the cached sum. Verdict.statistics carries one entry per executed
// check ("sum_norm_sq", "mean_dev", "mean_threshold", then "variance_stat",
// "variance_threshold", "gate_bound", "gate_active"). Requires n >= 2, eps > 0, and
// data.d() == params.d. Reaching the variance pass with ||S|| = 0 (possible only
// when nd <= 0.01 alpha^2 n^2) throws NumericError. Deterministic in (data, params).
Verdict sum_variance_test(const Dataset& data, const TestParams& params,
                          double gate_const = 1.0, SumVarianceStats* stats_out = nullptr);

// Both statistics computed unconditionally (calibration and diagnostics aid); the
// same NumericError applies when ||S|| = 0.
SumVarianceStats sum_variance_full_stats(const Dataset& data, const TestParams& params,
                                         double gate_const = 1.0);

// ceil(kappa^5 (sqrt(d)/a^2 + d eps^3/a^4 + min(d^{2/3} eps^{2/3}/a^{8/3},
// d eps/a^2))). Requires eps <= alpha; eps = 0 collapses to ceil(kappa^5 sqrt(d)/a^2).
std::size_t required_samples_oblivious(std::size_t d, double alpha, double eps,
                                       double kappa);

// Worst-subset evaluation of the four friendliness consequences, reported as the
// implied constant each one achieves. The corrupted-set budget stands in for eps*n:
// k = clamp(max(1, floor(eps n)), 1, n), and every denominator uses k where the
// bounds say eps*n. A subset B' of size s is scored as
//   norm_sum:   | ||Sum(B')||^2 - s d |      vs  kappa  * s * (sqrt(k d) + k)
//   r_variance: Sum_B (<X_i,R> - d)^2        vs  kappa^3 * k^2 * d   (R = Sum(B))
//   frobenius:  || Sum_B X_i X_i^T ||_F      vs  kappa   * d * sqrt(k)
//   operator:   || Sum_B X_i X_i^T ||_op     vs  kappa^2 * d
// norm_sum scans all sizes 1..k; the other three scan size k exactly.
struct ConsequenceReport {
  std::size_t bad_budget = 0;    // k above
  bool exact = false;            // true when every subset was enumerated (n <= 16)
  std::size_t subsets_examined = 0;

  double norm_sum_value = 0.0;
  double norm_sum_achieved = 0.0;
  std::vector<std::size_t> norm_sum_subset;

  double r_variance_value = 0.0;
  double r_variance_achieved = 0.0;
  std::vector<std::size_t> r_variance_subset;

  double frobenius_value = 0.0;
  double frobenius_achieved = 0.0;
  std::vector<std::size_t> frobenius_subset;

  double operator_value = 0.0;
  double operator_achieved = 0.0;
  std::vector<std::size_t> operator_subset;
};

// Exact enumeration for n <= 16, otherwise `trials` random subsets per consequence.
// rng feeds the subset draws and the power-iteration starts; exact mode is a
// deterministic function of (data, eps, kappa) up to those starts.
ConsequenceReport friendliness_consequences(const Dataset& data, double eps, double kappa,
                                            RngStream& rng, std::size_t trials = 256);

}  // namespace rmt
