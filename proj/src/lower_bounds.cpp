#include "rmt/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rmt/eigen.hpp"
#include "rmt/sampling.hpp"

namespace rmt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Determinant by LU with partial pivoting; a is k x k row-major, consumed.
double det_lu(std::vector<double> a, std::size_t k) {
  double det = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::fabs(a[r * k + col]) > std::fabs(a[piv * k + col])) piv = r;
    if (a[piv * k + col] == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t j = 0; j < k; ++j) std::swap(a[piv * k + j], a[col * k + j]);
      det = -det;
    }
    det *= a[col * k + col];
    for (std::size_t r = col + 1; r < k; ++r) {
      double f = a[r * k + col] / a[col * k + col];
      for (std::size_t j = col + 1; j < k; ++j) a[r * k + j] -= f * a[col * k + j];
    }
  }
  return det;
}

// Difference-of-squares form of det(I+G_{A,B}) scaled by ((1-eps) alpha^2 n + d)^2.
double factored_bracket(double alpha, double beta, double eps, double gamma, double n,
                        double d) {
  double a2 = alpha * alpha, b2 = beta * beta, n2 = n * n;
  double first = d + b2 * d * (eps * eps - gamma) * n2;
  double big = a2 * n - 2.0 * beta * d * eps * n + b2 * d * eps * n2 -
               2.0 * a2 * eps * n + a2 * gamma * n + 2.0 * beta * d * gamma * n -
               2.0 * b2 * d * eps * eps * n2 + b2 * d * eps * gamma * n2;
  return first * first - big * big;
}

struct BatchPlan {
  std::size_t count = 0;
  std::vector<std::size_t> begin;  // count+1 boundaries over [0, trials)
};

// Deterministic split of trials into min(trials, 50) near-equal batches.
BatchPlan plan_batches(std::size_t trials) {
  BatchPlan plan;
  plan.count = std::min<std::size_t>(trials, 50);
  plan.begin.resize(plan.count + 1);
  std::size_t base = trials / plan.count, rem = trials % plan.count;
  plan.begin[0] = 0;
  for (std::size_t b = 0; b < plan.count; ++b)
    plan.begin[b + 1] = plan.begin[b] + base + (b < rem ? 1 : 0);
  return plan;
}

// Mean and batch-means standard error from per-batch sums.
void reduce_batches(const BatchPlan& plan, const std::vector<double>& sums,
                    std::size_t trials, Chi2Estimate& out) {
  double total = 0.0;
  for (double s : sums) total += s;
  out.estimate = total / static_cast<double>(trials);
  double var = 0.0;
  for (std::size_t b = 0; b < plan.count; ++b) {
    std::size_t m = plan.begin[b + 1] - plan.begin[b];
    double dev = sums[b] / static_cast<double>(m) - out.estimate;
    var += dev * dev;
  }
  std::size_t B = plan.count;
  out.stderr_ = B > 1 ? std::sqrt(var / static_cast<double>(B * (B - 1))) : 0.0;
}

double log_sum_exp(const std::vector<double>& xs) {
  double mx = -kInf;
  for (double x : xs) mx = std::max(mx, x);
  if (mx == -kInf) return -kInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

// Central moments of Binomial(n, p) for orders 0..mmax in one pmf pass.
std::vector<double> binomial_central_moments_upto(std::size_t n, double p,
                                                  std::size_t mmax) {
  std::vector<double> mom(mmax + 1, 0.0);
  mom[0] = 1.0;
  if (n == 0 || p <= 0.0 || p >= 1.0) return mom;
  double nn = static_cast<double>(n), mean = nn * p;
  double lp = std::log(p), lq = std::log1p(-p), lgn = std::lgamma(nn + 1.0);
  for (std::size_t k = 0; k <= n; ++k) {
    double kk = static_cast<double>(k);
    double pmf = std::exp(lgn - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
                          kk * lp + (nn - kk) * lq);
    double dev = kk - mean, devpow = 1.0;
    for (std::size_t m = 1; m <= mmax; ++m) {
      devpow *= dev;
      mom[m] += pmf * devpow;
    }
  }
  return mom;
}

// Lower estimate of the smallest eigenvalue of symmetric M via power iteration
// on the positive-definite Gershgorin shift of -M.
double min_eigenvalue_estimate(const std::vector<double>& m, std::size_t k,
                               RngStream& rng) {
  double shift = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += std::fabs(m[i * k + j]);
    shift = std::max(shift, 1.0 + row);
  }
  std::vector<double> b(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      b[i * k + j] = (i == j ? shift : 0.0) - m[i * k + j];
  SingularPair top = spectral_norm_estimate(b, k, rng);
  return shift - top.value;
}

}  // namespace

void HuberLBConfig::validate() const {
  if (n == 0 || d == 0) throw ArgumentError("HuberLBConfig: n, d must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("HuberLBConfig: eps must lie in (0,1)");
  if (!(alpha >= eps)) throw ArgumentError("HuberLBConfig: requires alpha >= eps");
  if (!(K >= 100.0)) throw ArgumentError("HuberLBConfig: K must be >= 100");
  if (trials == 0) throw ArgumentError("HuberLBConfig: trials must be positive");
}

void ObliviousLBConfig::validate() const {
  if (n == 0 || d == 0) throw ArgumentError("ObliviousLBConfig: n, d must be positive");
  if (!(eps > 0.0 && eps < 1.0))
    throw ArgumentError("ObliviousLBConfig: eps must lie in (0,1)");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw ArgumentError("ObliviousLBConfig: alpha must be finite and nonnegative");
  if (trials == 0) throw ArgumentError("ObliviousLBConfig: trials must be positive");
}

void LowDegreeConfig::validate() const {
  if (n == 0 || d == 0) throw ArgumentError("LowDegreeConfig: n, d must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw ArgumentError("LowDegreeConfig: eps must lie in (0,1)");
  if (!(alpha > 0.0)) throw ArgumentError("LowDegreeConfig: alpha must be positive");
  if (D < 1) throw ArgumentError("LowDegreeConfig: D must be >= 1");
  if (!(rosenthal_C > 0.0) || !(sphere_c > 0.0))
    throw ArgumentError("LowDegreeConfig: shape constants must be positive");
}

double set_beta(double alpha, double eps, std::size_t n, std::size_t d) {
  double nn = static_cast<double>(n), dd = static_cast<double>(d);
  double x = alpha * alpha * nn / (dd * eps);
  if (!(x < 1.0)) throw ArgumentError("set_beta: requires alpha^2 n < d eps");
  // 1 - sqrt(1-x) rationalized to avoid cancellation at small x.
  return (x / (1.0 + std::sqrt(1.0 - x))) / nn;
}

double set_beta(const ObliviousLBConfig& cfg) {
  cfg.validate();
  return set_beta(cfg.alpha, cfg.eps, cfg.n, cfg.d);
}

IdentityCheck det_identity_check(double alpha, double beta, double eps, double gamma,
                                 std::size_t n, std::size_t d) {
  for (double v : {alpha, beta, eps, gamma})
    if (!std::isfinite(v)) throw ArgumentError("det_identity_check: inputs must be finite");
  double nn = static_cast<double>(n), dd = static_cast<double>(d);
  IdentityCheck out;
  out.lhs = factored_bracket(alpha, beta, eps, gamma, nn, dd);

  double a2 = alpha * alpha, bd = beta * dd, nb2d = (1.0 - eps) * nn * beta * beta * dd;
  double sigma[16] = {
      2.0 * nb2d,    nb2d + bd,  nb2d + bd,  2.0 * bd,  //
      nb2d + bd,     nb2d - a2,  2.0 * bd,   bd - a2,   //
      nb2d + bd,     2.0 * bd,   nb2d - a2,  bd - a2,   //
      2.0 * bd,      bd - a2,    bd - a2,    -2.0 * a2};
  double diag[4] = {gamma * nn, (eps - gamma) * nn, (eps - gamma) * nn,
                    (1.0 - 2.0 * eps + gamma) * nn};
  double q = (1.0 - eps) * a2 * nn + dd;
  std::vector<double> p(16);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      p[i * 4 + j] = (i == j ? 1.0 : 0.0) + diag[i] * sigma[i * 4 + j] / q;
  out.rhs = det_lu(std::move(p), 4) * q * q;
  out.ok = std::fabs(out.lhs - out.rhs) <= 1e-9 * std::max(1.0, std::fabs(out.lhs));
  return out;
}

double huber_t_statistic(std::size_t y, std::size_t a, std::size_t b, std::size_t n,
                         double alpha, double eps) {
  double inner = static_cast<double>(y) + eps * static_cast<double>(a + b) -
                 eps * (2.0 - eps) * static_cast<double>(n);
  return alpha * alpha / (eps * eps) * inner;
}

Chi2Estimate huber_chi2_estimate(const HuberLBConfig& cfg, RngStream& rng) {
  cfg.validate();
  double nn = static_cast<double>(cfg.n), dd = static_cast<double>(cfg.d);
  double center = (1.0 - cfg.eps) * nn;
  double width = cfg.K * std::sqrt(cfg.eps * nn);
  std::size_t lo = static_cast<std::size_t>(std::max(0.0, std::ceil(center - width)));
  std::size_t hi =
      static_cast<std::size_t>(std::min(nn, std::floor(center + width)));
  if (lo > hi) throw ConfigError("huber_chi2_estimate: empty good-set size window");

  BatchPlan plan = plan_batches(cfg.trials);
  std::vector<double> sums(plan.count, 0.0);
  std::vector<std::uint8_t> div_flag(plan.count, 0), stuck_flag(plan.count, 0);
  std::vector<std::uint64_t> proposed(plan.count, 0);
  const std::uint64_t kDrawCap = 100000;

#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < plan.count; ++b) {
    RngStream bs = rng.substream(b);
    double acc = 0.0;
    for (std::size_t t = plan.begin[b]; t < plan.begin[b + 1]; ++t) {
      std::size_t ab[2];
      for (int side = 0; side < 2 && !stuck_flag[b]; ++side) {
        std::uint64_t attempts = 0;
        for (;;) {
          ++attempts;
          std::size_t s = sample_binomial(cfg.n, 1.0 - cfg.eps, bs);
          if (s >= lo && s <= hi) {
            ab[side] = s;
            break;
          }
          if (attempts >= kDrawCap) {
            stuck_flag[b] = 1;
            ab[side] = lo;
            break;
          }
        }
        proposed[b] += attempts;
      }
      if (stuck_flag[b]) break;
      std::size_t y =
          sample_hypergeometric(cfg.n, cfg.n - ab[0], cfg.n - ab[1], bs);
      double tst = huber_t_statistic(y, ab[0], ab[1], cfg.n, cfg.alpha, cfg.eps);
      if (std::fabs(tst) >= dd) {
        div_flag[b] = 1;
        acc = kInf;
      } else {
        double r = tst / dd;
        acc += std::exp(-dd / 2.0 * std::log1p(-r * r));
      }
    }
    sums[b] = acc;
  }

  std::uint64_t total_proposed = 0;
  bool stuck = false, diverged = false;
  for (std::size_t b = 0; b < plan.count; ++b) {
    total_proposed += proposed[b];
    stuck |= stuck_flag[b] != 0;
    diverged |= div_flag[b] != 0;
  }
  double accepted = 2.0 * static_cast<double>(cfg.trials);
  if (stuck || accepted < 1e-3 * static_cast<double>(total_proposed))
    throw ConfigError("huber_chi2_estimate: window rejection acceptance below 1e-3");

  Chi2Estimate out;
  reduce_batches(plan, sums, cfg.trials, out);
  out.diverged = diverged;
  return out;
}

Chi2Estimate oblivious_chi2_estimate(const ObliviousLBConfig& cfg, RngStream& rng) {
  cfg.validate();
  double beta = cfg.beta < 0.0 ? set_beta(cfg) : cfg.beta;
  double nn = static_cast<double>(cfg.n), dd = static_cast<double>(cfg.d);
  if (!(beta <= 0.1 / nn))
    throw ArgumentError("oblivious_chi2_estimate: requires beta <= 0.1/n");
  if (!(cfg.alpha * cfg.alpha * nn <= 0.1 * dd))
    throw ArgumentError("oblivious_chi2_estimate: requires n <= 0.1 d / alpha^2");
  // The planted sets have size exactly eps*n; rounding a fractional size against
  // the eps in the integrand biases the estimate below 1 by more than the MC error.
  double kf = cfg.eps * nn;
  if (std::fabs(kf - std::round(kf)) > 1e-9)
    throw ArgumentError("oblivious_chi2_estimate: eps*n must be an integer");
  std::size_t k = static_cast<std::size_t>(std::llround(kf));

  BatchPlan plan = plan_batches(cfg.trials);
  std::vector<double> sums(plan.count, 0.0);
  std::vector<std::uint8_t> div_flag(plan.count, 0);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < plan.count; ++b) {
    RngStream bs = rng.substream(b);
    double acc = 0.0;
    for (std::size_t t = plan.begin[b]; t < plan.begin[b + 1]; ++t) {
      double gamma = k == 0
                         ? 0.0
                         : static_cast<double>(sample_hypergeometric(cfg.n, k, k, bs)) / nn;
      double bracket = factored_bracket(cfg.alpha, beta, cfg.eps, gamma, nn, dd);
      if (!(bracket > 0.0) || !std::isfinite(bracket)) {
        div_flag[b] = 1;
        acc = kInf;
      } else {
        acc += std::exp(-dd / 2.0 * (std::log(bracket) - 2.0 * std::log(dd)));
      }
    }
    sums[b] = acc;
  }

  Chi2Estimate out;
  reduce_batches(plan, sums, cfg.trials, out);
  for (std::uint8_t f : div_flag) out.diverged |= f != 0;
  return out;
}

double binomial_central_moment(std::size_t n, double p, std::size_t m) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ArgumentError("binomial_central_moment: p must lie in [0,1]");
  if (m > 20) throw ArgumentError("binomial_central_moment: order capped at 20");
  return binomial_central_moments_upto(n, p, m)[m];
}

double lowdegree_norm_bound(const LowDegreeConfig& cfg, LowDegreeMode mode) {
  cfg.validate();
  if (mode == LowDegreeMode::ExactMoments && 2 * cfg.D > 20)
    throw ArgumentError("lowdegree_norm_bound: exact moments capped at degree 10");
  double nn = static_cast<double>(cfg.n), dd = static_cast<double>(cfg.d);
  double probs[3] = {(1.0 - cfg.eps) * (1.0 - cfg.eps), cfg.eps * (1.0 - cfg.eps),
                     cfg.eps * cfg.eps};
  double log_ratio = std::log1p(-cfg.eps) - std::log(cfg.eps);  // (1-eps)/eps

  std::vector<std::vector<double>> exact(3);
  if (mode == LowDegreeMode::ExactMoments)
    for (int i = 0; i < 3; ++i)
      exact[i] = binomial_central_moments_upto(cfg.n, probs[i], 2 * cfg.D);

  std::vector<double> term_logs;
  for (std::size_t t = 2; t <= cfg.D; t += 2) {
    double tt = static_cast<double>(t);
    // Half log of E(Y - EY)^{2t} for each overlap variable.
    double half_log_mom[3];
    for (int i = 0; i < 3; ++i) {
      if (mode == LowDegreeMode::ExactMoments) {
        half_log_mom[i] = 0.5 * std::log(exact[i][2 * t]);
      } else {
        double np = nn * probs[i], npq = np * (1.0 - probs[i]);
        double c2t = std::log(cfg.rosenthal_C * 2.0 * tt);
        half_log_mom[i] = 0.5 * log_sum_exp({2.0 * tt * c2t + std::log(np),
                                             tt * c2t + tt * std::log(npq)});
      }
    }
    double split = log_sum_exp({half_log_mom[0], tt * log_ratio + half_log_mom[1],
                                2.0 * tt * log_ratio + half_log_mom[2]});
    double sphere = tt / 2.0 * std::log(cfg.sphere_c * cfg.sphere_c * tt / dd);
    term_logs.push_back(-std::lgamma(tt + 1.0) + sphere +
                        2.0 * tt * std::log(cfg.alpha) + split);
  }
  if (term_logs.empty()) return 0.0;
  return std::exp(log_sum_exp(term_logs));
}

OracleCheck mgf_det_check(const std::vector<double>& M, std::size_t k,
                          std::size_t samples, RngStream& rng) {
  if (k == 0 || M.size() != k * k)
    throw ArgumentError("mgf_det_check: M must be k x k with k >= 1");
  if (samples == 0) throw ArgumentError("mgf_det_check: samples must be positive");
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (std::fabs(M[i * k + j] - M[j * k + i]) > 1e-12)
        throw ArgumentError("mgf_det_check: M must be symmetric");
  RngStream eig_rng = rng.substream(~std::uint64_t{0});
  if (!(min_eigenvalue_estimate(M, k, eig_rng) > -1.0 + 1e-9))
    throw ArgumentError("mgf_det_check: M must have all eigenvalues > -1");

  std::vector<double> apm(k * k);
  for (std::size_t i = 0; i < k * k; ++i) apm[i] = M[i];
  for (std::size_t i = 0; i < k; ++i) apm[i * k + i] += 1.0;
  OracleCheck out;
  out.closed_form = 1.0 / std::sqrt(det_lu(std::move(apm), k));

  BatchPlan plan = plan_batches(samples);
  std::vector<double> sums(plan.count, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < plan.count; ++b) {
    RngStream bs = rng.substream(b);
    std::vector<double> z(k);
    double acc = 0.0;
    for (std::size_t s = plan.begin[b]; s < plan.begin[b + 1]; ++s) {
      for (std::size_t i = 0; i < k; ++i) z[i] = bs.next_gaussian();
      double quad = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < k; ++j) row += M[i * k + j] * z[j];
        quad += z[i] * row;
      }
      acc += std::exp(-0.5 * quad);
    }
    sums[b] = acc;
  }
  double total = 0.0;
  for (double s : sums) total += s;
  out.mc = total / static_cast<double>(samples);
  out.rel_err = std::fabs(out.mc - out.closed_form) / std::fabs(out.closed_form);
  return out;
}

OracleCheck shifted_gaussian_integral_check(double a, const std::vector<double>& s,
                                            double delta, std::size_t samples,
                                            RngStream& rng) {
  if (!(a >= 0.0) || !std::isfinite(a))
    throw ArgumentError("shifted_gaussian_integral_check: a must be finite and >= 0");
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ArgumentError("shifted_gaussian_integral_check: delta must be positive");
  if (s.empty()) throw ArgumentError("shifted_gaussian_integral_check: s must be nonempty");
  for (double v : s)
    if (!std::isfinite(v))
      throw ArgumentError("shifted_gaussian_integral_check: s must be finite");
  if (samples == 0)
    throw ArgumentError("shifted_gaussian_integral_check: samples must be positive");

  std::size_t d = s.size();
  double snorm2 = 0.0;
  for (double v : s) snorm2 += v * v;
  OracleCheck out;
  out.closed_form = std::exp(-static_cast<double>(d) / 2.0 * std::log1p(a * delta * delta) +
                             snorm2 / (2.0 * (a + 1.0 / (delta * delta))));

  BatchPlan plan = plan_batches(samples);
  std::vector<double> sums(plan.count, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < plan.count; ++b) {
    RngStream bs = rng.substream(b);
    double acc = 0.0;
    for (std::size_t t = plan.begin[b]; t < plan.begin[b + 1]; ++t) {
      double quad = 0.0, dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double z = delta * bs.next_gaussian();
        quad += z * z;
        dot += s[i] * z;
      }
      acc += std::exp(-a / 2.0 * quad + dot);
    }
    sums[b] = acc;
  }
  double total = 0.0;
  for (double v : sums) total += v;
  out.mc = total / static_cast<double>(samples);
  out.rel_err = std::fabs(out.mc - out.closed_form) / std::fabs(out.closed_form);
  return out;
}

}  // namespace rmt
