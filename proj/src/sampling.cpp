#include "rmt/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace rmt {

std::vector<double> sample_gaussian_matrix(std::size_t n, std::size_t d, RngStream& rng) {
  std::vector<double> out(n * d);
  std::uint64_t base = rng.counter();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t row_base = base + 2 * static_cast<std::uint64_t>(i) * d;
    for (std::size_t j = 0; j < d; ++j)
      out[i * d + j] = rng.gaussian_at(row_base + 2 * j);
  }
  rng.skip(2 * static_cast<std::uint64_t>(n) * d);
  return out;
}

std::vector<double> serial::sample_gaussian_matrix(std::size_t n, std::size_t d,
                                                   RngStream& rng) {
  std::vector<double> out(n * d);
  std::uint64_t base = rng.counter();
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t row_base = base + 2 * static_cast<std::uint64_t>(i) * d;
    for (std::size_t j = 0; j < d; ++j)
      out[i * d + j] = rng.gaussian_at(row_base + 2 * j);
  }
  rng.skip(2 * static_cast<std::uint64_t>(n) * d);
  return out;
}

std::size_t sample_hypergeometric(std::size_t n, std::size_t k1, std::size_t k2,
                                  RngStream& rng) {
  if (k1 > n || k2 > n)
    throw ArgumentError("sample_hypergeometric: subset sizes must be <= n");
  // Fix S, draw T one element at a time; only the count of marked elements matters.
  std::size_t draws = std::min(k1, k2);
  std::size_t marked = std::max(k1, k2);
  std::size_t left = n;
  std::size_t hits = 0;
  for (std::size_t j = 0; j < draws; ++j) {
    double u = rng.next_unit();
    if (u * static_cast<double>(left) < static_cast<double>(marked)) {
      ++hits;
      --marked;
    }
    --left;
  }
  return hits;
}

std::size_t sample_binomial(std::size_t n, double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("sample_binomial: p must lie in [0,1]");
  if (n == 0 || p == 0.0) { return 0; }
  if (p == 1.0) { return n; }
  bool flipped = p > 0.5;
  double q = flipped ? 1.0 - p : p;
  // Mode of Bin(n, q); pmf there via lgamma, then walk outward alternating sides.
  std::size_t m = static_cast<std::size_t>(std::floor((n + 1) * q));
  if (m > n) m = n;
  auto lpmf = [&](std::size_t k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
           k * std::log(q) + (n - k) * std::log1p(-q);
  };
  double u = rng.next_unit();
  double pm = std::exp(lpmf(m));
  double acc = pm;
  std::size_t result = m;
  if (u >= acc) {
    double up = pm, down = pm;
    std::size_t hi = m, lo = m;
    double ratio_q = q / (1.0 - q);
    for (;;) {
      bool moved = false;
      if (hi < n) {
        up *= ratio_q * static_cast<double>(n - hi) / static_cast<double>(hi + 1);
        ++hi;
        acc += up;
        moved = true;
        if (u < acc) { result = hi; break; }
      }
      if (lo > 0) {
        down *= static_cast<double>(lo) / (ratio_q * static_cast<double>(n - lo + 1));
        --lo;
        acc += down;
        moved = true;
        if (u < acc) { result = lo; break; }
      }
      if (!moved) { result = hi; break; }  // u in the lost-to-rounding tail mass
    }
  }
  return flipped ? n - result : result;
}

std::vector<std::size_t> sample_subset(std::size_t n, std::size_t k, RngStream& rng) {
  if (k > n) throw ArgumentError("sample_subset: k must be <= n");
  // Floyd's algorithm; O(k) expected draws.
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    std::size_t t = rng.next_below(j + 1);
    bool seen = std::find(out.begin(), out.end(), t) != out.end();
    out.push_back(seen ? j : t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rmt
