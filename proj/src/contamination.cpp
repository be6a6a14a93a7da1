#include "rmt/contamination.hpp"

#include <algorithm>
#include <cmath>

#include "rmt/kernels.hpp"
#include "rmt/sampling.hpp"

namespace rmt {
namespace {

std::vector<double> random_unit(std::size_t d, RngStream& rng) {
  std::vector<double> v(d);
  for (auto& x : v) x = rng.next_gaussian();
  double nrm = norm(v.data(), d);
  if (nrm < 1e-12) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return v;
  }
  for (auto& x : v) x /= nrm;
  return v;
}

std::vector<double> make_mu(const TestParams& params, Hypothesis hypothesis,
                            const std::vector<double>* direction, RngStream& rng,
                            bool randomize_mu_norm) {
  std::vector<double> mu(params.d, 0.0);
  if (hypothesis == Hypothesis::Null) return mu;
  std::vector<double> dir;
  if (direction) {
    if (direction->size() != params.d)
      throw ArgumentError("gen_clean: mu_direction has wrong dimension");
    double nrm = norm(direction->data(), params.d);
    if (std::fabs(nrm - 1.0) > 1e-8)
      throw ArgumentError("gen_clean: mu_direction must be a unit vector");
    dir = *direction;
  } else {
    dir = random_unit(params.d, rng);
  }
  double scale = params.alpha;
  if (randomize_mu_norm) scale *= 1.0 + rng.next_unit();
  for (std::size_t j = 0; j < params.d; ++j) mu[j] = scale * dir[j];
  return mu;
}

void add_row(std::vector<double>& rows, const std::vector<double>& mean,
             std::size_t d, RngStream& rng) {
  for (std::size_t j = 0; j < d; ++j) rows.push_back(mean[j] + rng.next_gaussian());
}

std::vector<unsigned char> mask_from_subset(std::size_t n,
                                            const std::vector<std::size_t>& bad) {
  std::vector<unsigned char> mask(n, 0);
  for (std::size_t i : bad) mask[i] = 1;
  return mask;
}

}  // namespace

std::size_t LabeledDataset::bad_total() const {
  return static_cast<std::size_t>(
      std::count(bad_mask.begin(), bad_mask.end(), static_cast<unsigned char>(1)));
}

ObliviousLBParams ObliviousLBParams::from(const TestParams& p, double beta) {
  ObliviousLBParams lb;
  lb.beta = beta;
  lb.alpha = p.alpha;
  lb.eps = p.eps;
  lb.n = p.n;
  lb.d = p.d;
  lb.validate();
  return lb;
}

void ObliviousLBParams::validate() const {
  if (n == 0 || d == 0) throw ArgumentError("ObliviousLBParams: n, d must be positive");
  if (!(beta >= 0.0)) throw ArgumentError("ObliviousLBParams: beta must be >= 0");
  if (beta > 0.1 / static_cast<double>(n))
    throw ArgumentError("ObliviousLBParams: beta exceeds the 0.1/n regime");
}

LabeledDataset gen_clean(const TestParams& params, Hypothesis hypothesis, RngStream& rng,
                         bool randomize_mu_norm) {
  params.validate();
  auto mu = make_mu(params, hypothesis, nullptr, rng, randomize_mu_norm);
  std::vector<double> rows;
  rows.reserve(params.n * params.d);
  for (std::size_t i = 0; i < params.n; ++i) add_row(rows, mu, params.d, rng);
  return LabeledDataset{Dataset(params.n, params.d, std::move(rows)),
                        std::vector<unsigned char>(params.n, 0), hypothesis,
                        std::move(mu), Adversary::Clean};
}

LabeledDataset gen_clean(const TestParams& params, Hypothesis hypothesis,
                         const std::vector<double>& mu_direction, RngStream& rng,
                         bool randomize_mu_norm) {
  params.validate();
  auto mu = make_mu(params, hypothesis, &mu_direction, rng, randomize_mu_norm);
  std::vector<double> rows;
  rows.reserve(params.n * params.d);
  for (std::size_t i = 0; i < params.n; ++i) add_row(rows, mu, params.d, rng);
  return LabeledDataset{Dataset(params.n, params.d, std::move(rows)),
                        std::vector<unsigned char>(params.n, 0), hypothesis,
                        std::move(mu), Adversary::Clean};
}

LabeledDataset gen_huber_lb(const TestParams& params, RngStream& corrupt_rng,
                            RngStream& good_rng) {
  params.validate();
  if (params.eps == 0.0)
    throw ArgumentError("gen_huber_lb: eps must be positive (mixture undefined)");
  std::size_t n = params.n, d = params.d;

  // Corruption stream: v, the component labels, then every bad row.
  std::vector<double> v(d);
  for (auto& x : v) x = corrupt_rng.next_gaussian() / std::sqrt(static_cast<double>(d));
  std::vector<unsigned char> mask(n);
  for (std::size_t i = 0; i < n; ++i)
    mask[i] = corrupt_rng.next_unit() < params.eps ? 1 : 0;

  std::vector<double> good_mean(d), bad_mean(d);
  double bad_scale = -(1.0 - params.eps) / params.eps * params.alpha;
  for (std::size_t j = 0; j < d; ++j) {
    good_mean[j] = params.alpha * v[j];
    bad_mean[j] = bad_scale * v[j];
  }

  std::vector<double> rows(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    for (std::size_t j = 0; j < d; ++j)
      rows[i * d + j] = bad_mean[j] + corrupt_rng.next_gaussian();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) continue;
    for (std::size_t j = 0; j < d; ++j)
      rows[i * d + j] = good_mean[j] + good_rng.next_gaussian();
  }
  return LabeledDataset{Dataset(n, d, std::move(rows)), std::move(mask),
                        Hypothesis::Alt, std::move(good_mean), Adversary::HuberLB};
}

LabeledDataset gen_huber_lb(const TestParams& params, RngStream& rng) {
  RngStream corrupt = rng.substream(0), good = rng.substream(1);
  return gen_huber_lb(params, corrupt, good);
}

LabeledDataset gen_oblivious_lb(const TestParams& params, const ObliviousLBParams& lb,
                                RngStream& corrupt_rng, RngStream& good_rng) {
  params.validate();
  lb.validate();
  if (lb.n != params.n || lb.d != params.d)
    throw ArgumentError("gen_oblivious_lb: params/lb dimension mismatch");
  std::size_t n = params.n, d = params.d, k = params.bad_count();

  // Corruption stream, consumed in full: A, X_A, z.
  auto bad_idx = sample_subset(n, k, corrupt_rng);
  std::vector<double> rows(n * d, 0.0);
  std::vector<double> r_a(d, 0.0);
  for (std::size_t i : bad_idx) {
    for (std::size_t j = 0; j < d; ++j) {
      double g = corrupt_rng.next_gaussian();
      rows[i * d + j] = g;
      r_a[j] += g;
    }
  }
  double zscale = params.alpha / std::sqrt(static_cast<double>(d));
  std::vector<double> mu(d);
  for (std::size_t j = 0; j < d; ++j) {
    double z = zscale * corrupt_rng.next_gaussian();
    mu[j] = -lb.beta * r_a[j] - z;
  }

  auto mask = mask_from_subset(n, bad_idx);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) continue;
    for (std::size_t j = 0; j < d; ++j)
      rows[i * d + j] = mu[j] + good_rng.next_gaussian();
  }
  return LabeledDataset{Dataset(n, d, std::move(rows)), std::move(mask),
                        Hypothesis::Alt, std::move(mu), Adversary::ObliviousLB};
}

LabeledDataset gen_oblivious_lb(const TestParams& params, const ObliviousLBParams& lb,
                                RngStream& rng) {
  RngStream corrupt = rng.substream(0), good = rng.substream(1);
  return gen_oblivious_lb(params, lb, corrupt, good);
}

LabeledDataset gen_oblivious_negmu(const TestParams& params, RngStream& corrupt_rng,
                                   RngStream& good_rng) {
  params.validate();
  if (params.eps <= 0.0) throw ArgumentError("gen_oblivious_negmu: eps must be positive");
  std::size_t n = params.n, d = params.d, k = params.bad_count();
  double p = -params.alpha / params.eps;  // projection onto the mu direction
  double B = 10.0 * std::sqrt(static_cast<double>(d) * std::log(static_cast<double>(n)));

  // Corruption stream: u (hence mu), A, and the shifted bad rows.
  auto u = random_unit(d, corrupt_rng);
  auto bad_idx = sample_subset(n, k, corrupt_rng);
  std::vector<double> rows(n * d, 0.0);
  for (std::size_t i : bad_idx) {
    std::vector<double> y(d);
    for (auto& x : y) x = corrupt_rng.next_gaussian();
    double p0 = dot(y.data(), u.data(), d);
    for (std::size_t j = 0; j < d; ++j) y[j] -= p0 * u[j];  // now the orthogonal part
    double w2 = norm2(y.data(), d);
    double lo = std::max(0.0, static_cast<double>(d) - B - p * p);
    double hi = std::max(0.0, static_cast<double>(d) + B - p * p);
    double t2 = std::clamp(w2, lo, hi);
    double scale = w2 > 0.0 ? std::sqrt(t2 / w2) : 0.0;
    for (std::size_t j = 0; j < d; ++j) rows[i * d + j] = p * u[j] + scale * y[j];
  }

  std::vector<double> mu(d);
  for (std::size_t j = 0; j < d; ++j) mu[j] = params.alpha * u[j];
  auto mask = mask_from_subset(n, bad_idx);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) continue;
    for (std::size_t j = 0; j < d; ++j)
      rows[i * d + j] = mu[j] + good_rng.next_gaussian();
  }
  return LabeledDataset{Dataset(n, d, std::move(rows)), std::move(mask),
                        Hypothesis::Alt, std::move(mu), Adversary::ObliviousNegmu};
}

LabeledDataset gen_oblivious_negmu(const TestParams& params, RngStream& rng) {
  RngStream corrupt = rng.substream(0), good = rng.substream(1);
  return gen_oblivious_negmu(params, corrupt, good);
}

LabeledDataset gen_adaptive_antialign(const TestParams& params, Hypothesis hypothesis,
                                      RngStream& corrupt_rng, RngStream& good_rng) {
  params.validate();
  if (params.eps <= 0.0)
    throw ArgumentError("gen_adaptive_antialign: eps must be positive");
  std::size_t n = params.n, d = params.d, k = params.bad_count();

  auto mu = make_mu(params, hypothesis, nullptr, good_rng, false);
  std::vector<double> rows;
  rows.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) add_row(rows, mu, d, good_rng);

  auto bad_idx = sample_subset(n, k, corrupt_rng);
  auto mask = mask_from_subset(n, bad_idx);
  std::vector<double> kept_sum(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) continue;
    for (std::size_t j = 0; j < d; ++j) kept_sum[j] += rows[i * d + j];
  }
  double nrm = norm(kept_sum.data(), d);
  double scale = nrm > 0.0 ? -std::sqrt(static_cast<double>(d)) / nrm : 0.0;
  for (std::size_t i : bad_idx)
    for (std::size_t j = 0; j < d; ++j) rows[i * d + j] = scale * kept_sum[j];

  return LabeledDataset{Dataset(n, d, std::move(rows)), std::move(mask), hypothesis,
                        std::move(mu), Adversary::AdaptiveAntialign};
}

LabeledDataset gen_adaptive_antialign(const TestParams& params, Hypothesis hypothesis,
                                      RngStream& rng) {
  RngStream corrupt = rng.substream(0), good = rng.substream(1);
  return gen_adaptive_antialign(params, hypothesis, corrupt, good);
}

}  // namespace rmt
