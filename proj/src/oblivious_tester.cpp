#include "rmt/oblivious_tester.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rmt/eigen.hpp"
#include "rmt/kernels.hpp"
#include "rmt/sampling.hpp"

namespace rmt {

namespace {

struct Thresholds {
  double mean = 0.0;
  double variance = 0.0;
  double gate_bound = 0.0;
};

Thresholds thresholds_for(std::size_t n, std::size_t d, const TestParams& params,
                          double gate_const) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double a2 = params.alpha * params.alpha;
  Thresholds t;
  t.mean = 0.01 * a2 * nn * nn;
  t.variance = 1.0 + 0.025 * (a2 * a2 / params.eps) * (nn / dd);
  t.gate_bound = gate_const * std::pow(params.kappa, 5.0) *
                 (std::sqrt(dd) / a2 + dd * params.eps / a2);
  return t;
}

void validate_test_inputs(const Dataset& data, const TestParams& params,
                          double gate_const) {
  params.validate();
  if (data.n() < 2) throw ArgumentError("sum_variance_test: need n >= 2");
  if (data.d() != params.d)
    throw ArgumentError("sum_variance_test: data dimension does not match params.d");
  if (!(params.eps > 0.0))
    throw ArgumentError("sum_variance_test: eps must be positive");
  if (!(gate_const > 0.0))
    throw ArgumentError("sum_variance_test: gate_const must be positive");
}

// Owner-computes per row, then a fixed-order accumulate, so the value is identical
// at any thread count.
double variance_statistic(const Dataset& data, const std::vector<double>& S,
                          double sum_norm_sq) {
  if (!(sum_norm_sq > 0.0))
    throw NumericError("sum_variance_test: ||S|| = 0, the sum direction is undefined");
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const double dd = static_cast<double>(d);
  const double inv_norm = 1.0 / std::sqrt(sum_norm_sq);
  std::vector<double> terms(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double z = (dot(data.row(static_cast<std::size_t>(i)), S.data(), d) - dd) *
                     inv_norm;
    terms[static_cast<std::size_t>(i)] = z * z;
  }
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc / static_cast<double>(n);
}

}  // namespace

Verdict sum_variance_test(const Dataset& data, const TestParams& params,
                          double gate_const, SumVarianceStats* stats_out) {
  validate_test_inputs(data, params, gate_const);
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const Thresholds thr = thresholds_for(n, d, params, gate_const);

  const std::vector<double> S = weighted_sum(data, Weights(n, 1.0));
  SumVarianceStats st;
  st.sum_norm_sq = norm2(S.data(), d);
  st.mean_dev = st.sum_norm_sq - static_cast<double>(n) * static_cast<double>(d);
  st.gate_active = static_cast<double>(n) <= thr.gate_bound;

  Verdict v;
  v.statistics["sum_norm_sq"] = st.sum_norm_sq;
  v.statistics["mean_dev"] = st.mean_dev;
  v.statistics["mean_threshold"] = thr.mean;
  if (std::abs(st.mean_dev) > thr.mean) {
    v.decision = Decision::Reject;
    if (stats_out) *stats_out = st;
    return v;
  }

  st.variance_stat = variance_statistic(data, S, st.sum_norm_sq);
  v.statistics["variance_stat"] = st.variance_stat;
  v.statistics["variance_threshold"] = thr.variance;
  v.statistics["gate_bound"] = thr.gate_bound;
  v.statistics["gate_active"] = st.gate_active ? 1.0 : 0.0;
  v.decision = (st.variance_stat >= thr.variance && st.gate_active)
                   ? Decision::Reject
                   : Decision::AcceptNull;
  if (stats_out) *stats_out = st;
  return v;
}

SumVarianceStats sum_variance_full_stats(const Dataset& data, const TestParams& params,
                                         double gate_const) {
  validate_test_inputs(data, params, gate_const);
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const Thresholds thr = thresholds_for(n, d, params, gate_const);

  const std::vector<double> S = weighted_sum(data, Weights(n, 1.0));
  SumVarianceStats st;
  st.sum_norm_sq = norm2(S.data(), d);
  st.mean_dev = st.sum_norm_sq - static_cast<double>(n) * static_cast<double>(d);
  st.gate_active = static_cast<double>(n) <= thr.gate_bound;
  st.variance_stat = variance_statistic(data, S, st.sum_norm_sq);
  return st;
}

std::size_t required_samples_oblivious(std::size_t d, double alpha, double eps,
                                       double kappa) {
  if (d == 0) throw ArgumentError("required_samples_oblivious: d must be positive");
  if (!(alpha > 0.0))
    throw ArgumentError("required_samples_oblivious: alpha must be positive");
  if (!(eps >= 0.0))
    throw ArgumentError("required_samples_oblivious: eps must be nonnegative");
  if (eps > alpha)
    throw ArgumentError("required_samples_oblivious: eps <= alpha is required");
  if (!(kappa > 0.0))
    throw ArgumentError("required_samples_oblivious: kappa must be positive");

  const double dd = static_cast<double>(d);
  const double a2 = alpha * alpha;
  const double k5 = std::pow(kappa, 5.0);
  const double base = std::sqrt(dd) / a2;
  const double cubic = dd * eps * eps * eps / (a2 * a2);
  const double branch_lo = std::pow(dd, 2.0 / 3.0) * std::pow(eps, 2.0 / 3.0) /
                           std::pow(alpha, 8.0 / 3.0);
  const double branch_hi = dd * eps / a2;
  const double total = k5 * (base + cubic + std::min(branch_lo, branch_hi));
  if (!(total < 9.0e18))
    throw ArgumentError("required_samples_oblivious: count overflows");
  return static_cast<std::size_t>(std::ceil(total));
}

namespace {

struct ConsequenceDenoms {
  double r_variance = 0.0;
  double frobenius = 0.0;
  double op = 0.0;
  double norm_sum_for(std::size_t s, double kappa, std::size_t k, double dd) const {
    const double kk = static_cast<double>(k);
    return kappa * static_cast<double>(s) * (std::sqrt(kk * dd) + kk);
  }
};

ConsequenceDenoms make_denoms(double kappa, std::size_t k, double dd) {
  const double kk = static_cast<double>(k);
  ConsequenceDenoms den;
  den.r_variance = kappa * kappa * kappa * kk * kk * dd;
  den.frobenius = kappa * dd * std::sqrt(kk);
  den.op = kappa * kappa * dd;
  return den;
}

std::vector<std::size_t> mask_to_indices(std::uint32_t mask) {
  std::vector<std::size_t> out;
  while (mask) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

ConsequenceReport exact_consequences(const Dataset& data, double kappa, std::size_t k,
                                     RngStream& rng) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const double dd = static_cast<double>(d);
  const ConsequenceDenoms den = make_denoms(kappa, k, dd);

  std::vector<double> G(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      G[i * n + j] = G[j * n + i] = dot(data.row(i), data.row(j), d);

  // normsq[m] = ||Sum(m)||^2 and frob2[m] = ||Sum_m X_i X_i^T||_F^2, filled by
  // peeling the lowest set bit; m & (m-1) < m, so one ascending pass suffices.
  const std::uint32_t nmasks = static_cast<std::uint32_t>(1u << n);
  std::vector<double> normsq(nmasks, 0.0);
  std::vector<double> frob2(nmasks, 0.0);

  ConsequenceReport rep;
  rep.bad_budget = k;
  rep.exact = true;
  std::uint32_t best_norm_mask = 0, best_rvar_mask = 0, best_frob_mask = 0,
                best_op_mask = 0;
  std::vector<std::size_t> idx_buf;
  std::vector<double> sub_buf;

  for (std::uint32_t m = 1; m < nmasks; ++m) {
    const unsigned i = static_cast<unsigned>(std::countr_zero(m));
    const std::uint32_t rest = m & (m - 1);
    double ns = normsq[rest] + G[i * n + i];
    double f2 = frob2[rest] + G[i * n + i] * G[i * n + i];
    for (std::uint32_t r = rest; r;) {
      const unsigned j = static_cast<unsigned>(std::countr_zero(r));
      r &= r - 1;
      ns += 2.0 * G[i * n + j];
      f2 += 2.0 * G[i * n + j] * G[i * n + j];
    }
    normsq[m] = ns;
    frob2[m] = f2;

    const std::size_t s = static_cast<std::size_t>(std::popcount(m));
    if (s > k) continue;
    ++rep.subsets_examined;

    const double nval = std::abs(ns - static_cast<double>(s) * dd);
    const double nach = nval / den.norm_sum_for(s, kappa, k, dd);
    if (nach > rep.norm_sum_achieved) {
      rep.norm_sum_achieved = nach;
      rep.norm_sum_value = nval;
      best_norm_mask = m;
    }

    if (s != k) continue;

    idx_buf = mask_to_indices(m);
    double rvar = 0.0;
    for (std::size_t a : idx_buf) {
      double rowsum = 0.0;
      for (std::size_t b : idx_buf) rowsum += G[a * n + b];
      const double dev = rowsum - dd;
      rvar += dev * dev;
    }
    if (rvar > rep.r_variance_value) {
      rep.r_variance_value = rvar;
      best_rvar_mask = m;
    }

    const double frob = std::sqrt(f2);
    if (frob > rep.frobenius_value) {
      rep.frobenius_value = frob;
      best_frob_mask = m;
    }

    // The Frobenius norm bounds the operator norm, so it prunes the eigensolve.
    if (frob > rep.operator_value) {
      sub_buf.assign(k * k, 0.0);
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b)
          sub_buf[a * k + b] = G[idx_buf[a] * n + idx_buf[b]];
      const SingularPair top = spectral_norm_estimate(sub_buf, k, rng);
      if (top.value > rep.operator_value) {
        rep.operator_value = top.value;
        best_op_mask = m;
      }
    }
  }

  rep.norm_sum_subset = mask_to_indices(best_norm_mask);
  rep.r_variance_subset = mask_to_indices(best_rvar_mask);
  rep.frobenius_subset = mask_to_indices(best_frob_mask);
  rep.operator_subset = mask_to_indices(best_op_mask);
  rep.r_variance_achieved = rep.r_variance_value / den.r_variance;
  rep.frobenius_achieved = rep.frobenius_value / den.frobenius;
  rep.operator_achieved = rep.operator_value / den.op;
  return rep;
}

ConsequenceReport randomized_consequences(const Dataset& data, double kappa,
                                          std::size_t k, RngStream& rng,
                                          std::size_t trials) {
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const double dd = static_cast<double>(d);
  const ConsequenceDenoms den = make_denoms(kappa, k, dd);

  ConsequenceReport rep;
  rep.bad_budget = k;
  std::vector<double> gram_buf(k * k);

  auto score_norm_sum = [&](const std::vector<std::size_t>& idx,
                            const std::vector<double>& sum_vec) {
    const std::size_t s = idx.size();
    const double nval = std::abs(norm2(sum_vec.data(), d) - static_cast<double>(s) * dd);
    const double nach = nval / den.norm_sum_for(s, kappa, k, dd);
    if (nach > rep.norm_sum_achieved) {
      rep.norm_sum_achieved = nach;
      rep.norm_sum_value = nval;
      rep.norm_sum_subset = idx;
    }
  };

  for (std::size_t t = 0; t < trials; ++t) {
    const std::vector<std::size_t> idx = sample_subset(n, k, rng);
    const std::vector<double> R = sum_subset(data, idx);
    score_norm_sum(idx, R);

    double rvar = 0.0;
    for (std::size_t a : idx) {
      const double dev = dot(data.row(a), R.data(), d) - dd;
      rvar += dev * dev;
    }
    if (rvar > rep.r_variance_value) {
      rep.r_variance_value = rvar;
      rep.r_variance_subset = idx;
    }

    double f2 = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a; b < k; ++b) {
        const double g = dot(data.row(idx[a]), data.row(idx[b]), d);
        gram_buf[a * k + b] = gram_buf[b * k + a] = g;
        f2 += (a == b) ? g * g : 2.0 * g * g;
      }
    const double frob = std::sqrt(f2);
    if (frob > rep.frobenius_value) {
      rep.frobenius_value = frob;
      rep.frobenius_subset = idx;
    }
    if (frob > rep.operator_value) {
      const SingularPair top = spectral_norm_estimate(gram_buf, k, rng);
      if (top.value > rep.operator_value) {
        rep.operator_value = top.value;
        rep.operator_subset = idx;
      }
    }

    const std::size_t s = 1 + static_cast<std::size_t>(rng.next_below(k));
    const std::vector<std::size_t> small = sample_subset(n, s, rng);
    score_norm_sum(small, sum_subset(data, small));
    rep.subsets_examined += 2;
  }

  rep.r_variance_achieved = rep.r_variance_value / den.r_variance;
  rep.frobenius_achieved = rep.frobenius_value / den.frobenius;
  rep.operator_achieved = rep.operator_value / den.op;
  return rep;
}

}  // namespace

ConsequenceReport friendliness_consequences(const Dataset& data, double eps, double kappa,
                                            RngStream& rng, std::size_t trials) {
  if (data.n() == 0)
    throw ArgumentError("friendliness_consequences: empty dataset");
  if (!(eps >= 0.0 && eps <= 1.0))
    throw ArgumentError("friendliness_consequences: eps must lie in [0,1]");
  if (!(kappa > 0.0))
    throw ArgumentError("friendliness_consequences: kappa must be positive");

  const std::size_t n = data.n();
  const std::size_t raw =
      static_cast<std::size_t>(std::floor(eps * static_cast<double>(n)));
  const std::size_t k = std::min(std::max<std::size_t>(raw, 1), n);

  if (n <= 16) return exact_consequences(data, kappa, k, rng);
  if (trials == 0)
    throw ArgumentError("friendliness_consequences: trials must be positive");
  return randomized_consequences(data, kappa, k, rng, trials);
}

}  // namespace rmt
