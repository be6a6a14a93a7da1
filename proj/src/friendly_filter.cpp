#include "rmt/friendly_filter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>

#include <json.hpp>

#include "rmt/kernels.hpp"
#include "rmt/sampling.hpp"

namespace rmt {

namespace {

std::vector<std::size_t> mask_to_indices(std::uint32_t mask,
                                         const std::vector<std::size_t>& universe) {
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < universe.size(); ++b)
    if (mask & (1u << b)) out.push_back(universe[b]);
  return out;
}

// Entries (c_j, j) sorted by c descending. For fixed k2, the T maximizing
// |sum_{j in T} c_j| is either the top-k2 prefix or the bottom-k2 suffix.
struct ScoredPool {
  std::vector<std::pair<double, std::size_t>> sorted;  // c descending
  std::vector<double> prefix;                          // prefix[k] = sum of top k

  explicit ScoredPool(std::vector<std::pair<double, std::size_t>> entries)
      : sorted(std::move(entries)) {
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    prefix.assign(sorted.size() + 1, 0.0);
    for (std::size_t i = 0; i < sorted.size(); ++i)
      prefix[i + 1] = prefix[i] + sorted[i].first;
  }

  // Signed sum with the largest magnitude over subsets of size k2.
  double best_value(std::size_t k2) const {
    double pos = prefix[k2];
    double neg = prefix[sorted.size()] - prefix[sorted.size() - k2];
    return std::fabs(pos) >= std::fabs(neg) ? pos : neg;
  }

  std::vector<std::size_t> best_subset(std::size_t k2) const {
    double pos = prefix[k2];
    double neg = prefix[sorted.size()] - prefix[sorted.size() - k2];
    std::vector<std::size_t> out;
    if (std::fabs(pos) >= std::fabs(neg)) {
      for (std::size_t i = 0; i < k2; ++i) out.push_back(sorted[i].second);
    } else {
      for (std::size_t i = sorted.size() - k2; i < sorted.size(); ++i)
        out.push_back(sorted[i].second);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

ScoredPool score_pool(const Dataset& data, const std::vector<double>& base,
                      const std::vector<char>& excluded,
                      const std::vector<std::size_t>& universe) {
  std::vector<std::pair<double, std::size_t>> entries;
  for (std::size_t j : universe) {
    if (excluded[j]) continue;
    entries.emplace_back(dot(base.data(), data.row(j), data.d()), j);
  }
  return ScoredPool(std::move(entries));
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

struct PairWitness {
  std::vector<std::size_t> s1, s2;
  double value = 0.0;
  double bound = 0.0;
  double ratio() const { return bound > 0.0 ? std::fabs(value) / bound : 0.0; }
};

// Scans every k2 for one fixed S1; returns the witness with the largest
// violation ratio. bound_fn(k1, k2) supplies the clause bound.
template <typename BoundFn>
PairWitness best_for_s1(const Dataset& data, const std::vector<std::size_t>& s1,
                        const std::vector<char>& in_s1,
                        const std::vector<std::size_t>& universe, std::size_t k2_max,
                        BoundFn bound_fn) {
  PairWitness best;
  if (universe.size() <= s1.size()) return best;
  std::vector<double> base = sum_subset(data, s1);
  ScoredPool pool = score_pool(data, base, in_s1, universe);
  std::size_t avail = pool.sorted.size();
  for (std::size_t k2 = 1; k2 <= std::min(k2_max, avail); ++k2) {
    double bound = bound_fn(s1.size(), k2);
    if (bound <= 0.0) continue;
    double value = pool.best_value(k2);
    if (best.bound == 0.0 || std::fabs(value) / bound > best.ratio()) {
      best.s1 = s1;
      best.s2 = pool.best_subset(k2);
      best.value = value;
      best.bound = bound;
    }
  }
  return best;
}

void keep_if_better(PairWitness& best, const PairWitness& cand) {
  if (cand.bound == 0.0) return;
  if (best.bound == 0.0 || cand.ratio() > best.ratio()) best = cand;
}

// Worst cross-sum pair over all S of size <= k1_max (exhaustive, n <= 16).
template <typename BoundFn>
PairWitness exact_pair_search(const Dataset& data, std::size_t k1_max,
                              std::size_t k2_max, BoundFn bound_fn,
                              std::size_t product_cap) {
  std::size_t n = data.n();
  if (n > 16) throw CapacityError("exact subset search requires n <= 16");
  PairWitness best;
  if (k1_max == 0 || k2_max == 0) return best;
  std::vector<std::size_t> universe = iota_indices(n);
  std::vector<char> in_s1(n, 0);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    int k1 = std::popcount(mask);
    if (k1 < 1 || static_cast<std::size_t>(k1) > k1_max) continue;
    std::vector<std::size_t> s1 = mask_to_indices(mask, universe);
    for (std::size_t i : s1) in_s1[i] = 1;
    std::size_t k2_cap = std::min(k2_max, product_cap / s1.size());
    PairWitness cand = best_for_s1(data, s1, in_s1, universe, k2_cap, bound_fn);
    keep_if_better(best, cand);
    for (std::size_t i : s1) in_s1[i] = 0;
  }
  return best;
}

// Random S1 draws, each paired with the exact best T per size.
template <typename BoundFn>
PairWitness randomized_pair_search(const Dataset& data, std::size_t k1_max,
                                   std::size_t k2_max, BoundFn bound_fn,
                                   std::size_t product_cap, std::size_t trials,
                                   RngStream& rng) {
  std::size_t n = data.n();
  PairWitness best;
  if (k1_max == 0 || k2_max == 0 || n < 2) return best;
  std::vector<std::size_t> universe = iota_indices(n);
  std::vector<char> in_s1(n, 0);
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t k1 = 1 + rng.next_below(std::min(k1_max, n - 1));
    std::vector<std::size_t> s1 = sample_subset(n, k1, rng);
    for (std::size_t i : s1) in_s1[i] = 1;
    std::size_t k2_cap = std::min(k2_max, product_cap / k1);
    PairWitness cand = best_for_s1(data, s1, in_s1, universe, k2_cap, bound_fn);
    keep_if_better(best, cand);
    for (std::size_t i : s1) in_s1[i] = 0;
  }
  return best;
}

void validate_search_spec(const SearchSpec& spec) {
  if (spec.mode == SearchMode::Randomized && spec.trials == 0)
    throw ArgumentError("randomized search requires trials >= 1");
}

std::vector<double> unit_direction(const Dataset& data,
                                   const std::vector<std::size_t>& idx) {
  std::vector<double> dir = sum_subset(data, idx);
  double nrm = norm(dir.data(), dir.size());
  if (nrm == 0.0) throw ArgumentError("direction has zero sum");
  for (double& v : dir) v /= nrm;
  return dir;
}

}  // namespace

void BalancedParams::validate(std::size_t n) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ArgumentError("BalancedParams: lambda must be positive and finite");
  if (m < 1 || m > n) throw ArgumentError("BalancedParams: need 1 <= m <= n");
  if (k < 1) throw ArgumentError("BalancedParams: k must be >= 1");
}

double default_lambda(std::size_t n) {
  return 36.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 3)));
}

FriendlinessReport check_friendly(const Dataset& data, double eps, double kappa,
                                  const SearchSpec& spec, RngStream& rng) {
  if (!(eps >= 0.0) || !(eps < 1.0)) throw ArgumentError("check_friendly: eps in [0,1)");
  if (!(kappa > 0.0)) throw ArgumentError("check_friendly: kappa must be positive");
  validate_search_spec(spec);
  std::size_t n = data.n(), d = data.d();
  if (spec.mode == SearchMode::Exact && n > 16)
    throw CapacityError("check_friendly: exact mode requires n <= 16");

  FriendlinessReport rep;
  double sqd = std::sqrt(static_cast<double>(d));
  double dd = static_cast<double>(d);

  // Norm and pairwise clauses are always scanned exhaustively; only the
  // cross-sum clause needs subset search.
  double worst_norm = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dev = norm2(data.row(i), d) - dd;
    if (std::fabs(dev) > worst_norm) {
      worst_norm = std::fabs(dev);
      rep.worst_norm_i = i;
      rep.worst_norm_value = dev;
    }
  }
  rep.norm_ok = n == 0 || std::fabs(rep.worst_norm_value) <= kappa * sqd;

  double worst_ip = -1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double ip = dot(data.row(i), data.row(j), d);
      if (std::fabs(ip) > worst_ip) {
        worst_ip = std::fabs(ip);
        rep.worst_ip_i = i;
        rep.worst_ip_j = j;
        rep.worst_ip_value = ip;
      }
    }
  }
  rep.inner_product_ok = n < 2 || std::fabs(rep.worst_ip_value) <= kappa * sqd;

  std::size_t kmax =
      static_cast<std::size_t>(std::floor(eps * static_cast<double>(n)));
  if (kmax >= 1 && n >= 2) {
    double scale = std::max(std::sqrt(eps * static_cast<double>(n) * dd),
                            eps * static_cast<double>(n));
    auto bound_fn = [kappa, scale](std::size_t k1, std::size_t k2) {
      return kappa * std::sqrt(static_cast<double>(k1 * k2)) * scale;
    };
    std::size_t no_cap = n * n;
    PairWitness w =
        spec.mode == SearchMode::Exact
            ? exact_pair_search(data, kmax, kmax, bound_fn, no_cap)
            : randomized_pair_search(data, kmax, kmax, bound_fn, no_cap,
                                     spec.trials, rng);
    if (w.bound > 0.0) {
      rep.worst_S = w.s1;
      rep.worst_T = w.s2;
      rep.worst_pair_value = w.value;
      rep.worst_pair_bound = w.bound;
      rep.cross_sum_ok = std::fabs(w.value) <= w.bound;
    }
  }
  rep.ok = rep.cross_sum_ok && rep.inner_product_ok && rep.norm_ok;
  return rep;
}

std::optional<BalancedViolation> check_balanced(const Dataset& data,
                                                const BalancedParams& p,
                                                const SearchSpec& spec,
                                                RngStream& rng) {
  p.validate(data.n());
  validate_search_spec(spec);
  std::size_t n = data.n();
  if (spec.mode == SearchMode::Exact && n > 16)
    throw CapacityError("check_balanced: exact mode requires n <= 16");
  if (n < 2) return std::nullopt;

  double dd = static_cast<double>(data.d());
  double lambda = p.lambda;
  auto bound_fn = [lambda, dd](std::size_t k1, std::size_t k2) {
    return std::sqrt(lambda * static_cast<double>(k1 * k2) * dd);
  };
  std::size_t size_cap = std::min(p.m, n);
  PairWitness w = spec.mode == SearchMode::Exact
                      ? exact_pair_search(data, size_cap, size_cap, bound_fn, p.k)
                      : randomized_pair_search(data, size_cap, size_cap, bound_fn,
                                               p.k, spec.trials, rng);
  if (w.bound > 0.0 && std::fabs(w.value) > w.bound) {
    BalancedViolation v;
    v.s1 = w.s1;
    v.s2 = w.s2;
    v.value = w.value;
    v.bound = w.bound;
    return v;
  }
  return std::nullopt;
}

std::vector<std::size_t> apply_filter(const Dataset& data, const FilterSet& f,
                                      const Dataset& reference) {
  if (data.d() != reference.d())
    throw ArgumentError("apply_filter: dimension mismatch");
  if (!(f.gamma >= 0.0)) throw ArgumentError("apply_filter: gamma must be >= 0");
  std::vector<std::vector<double>> dirs;
  for (const auto& t : f.directions) {
    if (t.empty()) throw ArgumentError("apply_filter: empty direction index list");
    for (std::size_t i : t)
      if (i >= reference.n())
        throw ArgumentError("apply_filter: direction index out of range");
    dirs.push_back(unit_direction(reference, t));
  }
  std::vector<std::size_t> survivors;
  for (std::size_t v = 0; v < data.n(); ++v) {
    bool removed = false;
    for (const auto& dir : dirs) {
      if (std::fabs(dot(data.row(v), dir.data(), data.d())) >= f.gamma) {
        removed = true;
        break;
      }
    }
    if (!removed) survivors.push_back(v);
  }
  return survivors;
}

std::string filter_set_to_json(const FilterSet& f) {
  nlohmann::json j;
  j["gamma"] = f.gamma;
  j["directions"] = f.directions;
  return j.dump(2);
}

FilterSet filter_set_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("filter_set_from_json: parse failure: ") + e.what());
  }
  if (!j.is_object() || !j.contains("gamma") || !j.contains("directions") ||
      !j["gamma"].is_number() || !j["directions"].is_array())
    throw ArgumentError("filter_set_from_json: expected {gamma, directions}");
  FilterSet f;
  f.gamma = j["gamma"].get<double>();
  for (const auto& dir : j["directions"]) {
    if (!dir.is_array())
      throw ArgumentError("filter_set_from_json: directions must be index lists");
    std::vector<std::size_t> idx;
    for (const auto& v : dir) {
      if (!v.is_number_unsigned())
        throw ArgumentError("filter_set_from_json: indices must be unsigned");
      idx.push_back(v.get<std::size_t>());
    }
    f.directions.push_back(std::move(idx));
  }
  return f;
}

CompressionResult witness_compression(const Dataset& data,
                                      const std::vector<std::size_t>& s1,
                                      const std::vector<std::size_t>& s2, double theta,
                                      double lambda, double C, std::size_t m,
                                      RngStream& rng, std::size_t max_subsets) {
  if (s1.empty() || s2.empty())
    throw ArgumentError("witness_compression: both index sets must be nonempty");
  if (!(theta > 0.0) || !(lambda > 0.0) || theta > lambda)
    throw ArgumentError("witness_compression: need 0 < theta <= lambda");
  if (!(C >= 1.0)) throw ArgumentError("witness_compression: C must be >= 1");
  if (m < 1) throw ArgumentError("witness_compression: m must be >= 1");
  std::size_t n = data.n(), d = data.d();
  std::vector<char> in_s1(n, 0);
  for (std::size_t i : s1) {
    if (i >= n) throw ArgumentError("witness_compression: index out of range");
    in_s1[i] = 1;
  }
  for (std::size_t i : s2) {
    if (i >= n) throw ArgumentError("witness_compression: index out of range");
    if (in_s1[i]) throw ArgumentError("witness_compression: sets must be disjoint");
  }

  std::vector<double> sum1 = sum_subset(data, s1);
  std::vector<double> sum2 = sum_subset(data, s2);
  double ip = dot(sum1.data(), sum2.data(), d);
  double need =
      std::sqrt(theta * static_cast<double>(s1.size() * s2.size()) * static_cast<double>(d));
  if (std::fabs(ip) < need)
    throw ArgumentError("witness_compression: pair does not meet the correlation floor");
  double sign = ip >= 0.0 ? 1.0 : -1.0;

  std::size_t cap = static_cast<std::size_t>(
      std::floor(static_cast<double>(s1.size() * s2.size()) / (C * static_cast<double>(m))));
  cap = std::min(s1.size(), std::max<std::size_t>(1, cap));

  CompressionResult out;
  out.threshold = std::sqrt(theta) / (16.0 * std::sqrt(C * static_cast<double>(m)));
  out.lemma_target = theta * static_cast<double>(s2.size()) / (80.0 * lambda);

  auto score = [&](const std::vector<std::size_t>& subset) -> std::size_t {
    std::vector<double> dir = sum_subset(data, subset);
    double nrm = norm(dir.data(), d);
    if (nrm == 0.0) return 0;
    std::size_t count = 0;
    for (std::size_t v : s2)
      if (sign * dot(data.row(v), dir.data(), d) / nrm >= out.threshold) ++count;
    return count;
  };

  // Deterministic seed candidates: prefixes of S1 ranked by alignment with Sum(S2).
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i : s1)
    ranked.emplace_back(sign * dot(data.row(i), sum2.data(), d), i);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t best_count = 0;
  std::vector<std::size_t> best_subset;
  auto consider = [&](std::vector<std::size_t> subset) {
    std::size_t c = score(subset);
    if (best_subset.empty() || c > best_count) {
      best_count = c;
      std::sort(subset.begin(), subset.end());
      best_subset = std::move(subset);
    }
  };
  for (std::size_t size = 1; size <= cap; ++size) {
    std::vector<std::size_t> prefix;
    for (std::size_t i = 0; i < size; ++i) prefix.push_back(ranked[i].second);
    consider(std::move(prefix));
  }
  for (std::size_t t = 0; t < max_subsets; ++t) {
    std::size_t size = 1 + rng.next_below(cap);
    std::vector<std::size_t> pos = sample_subset(s1.size(), size, rng);
    std::vector<std::size_t> subset;
    for (std::size_t pidx : pos) subset.push_back(s1[pidx]);
    consider(std::move(subset));
  }
  out.subset = best_subset;
  out.count = best_count;
  return out;
}

SplittingSchedule splitting_schedule(std::size_t n, std::size_t m, double delta) {
  if (n < 1 || m < 1) throw ArgumentError("splitting_schedule: need n, m >= 1");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw ArgumentError("splitting_schedule: delta in (0,1)");
  double L = std::max(
      1.0, std::ceil(std::log(static_cast<double>(n) * static_cast<double>(m) / delta)));
  SplittingSchedule sched;
  sched.k0 = std::min(m * m, m * static_cast<std::size_t>(L));
  sched.s0 = std::min(m, std::max<std::size_t>(2, static_cast<std::size_t>(L)));
  double lm = std::log(static_cast<double>(std::max<std::size_t>(m, 3)));
  sched.p = 1.0 / (5.0 * lm * lm);
  return sched;
}

std::vector<std::size_t> single_filtering_iteration(
    const Dataset& data, double lambda, std::size_t m, std::size_t k, std::size_t s,
    double p, RngStream& rng, const SearchBudget& budget,
    const FilterConstants& consts, IterationTrace* trace) {
  std::size_t n = data.n(), d = data.d();
  if (!(lambda > 0.0)) throw ArgumentError("single_filtering_iteration: lambda > 0");
  if (m < 1 || k < 1 || s < 1)
    throw ArgumentError("single_filtering_iteration: m, k, s must be >= 1");
  if (!(p > 0.0) || !(p < 1.0))
    throw ArgumentError("single_filtering_iteration: p in (0,1)");
  if (budget.max_candidate_collections < 1 || budget.max_random_subsets < 1)
    throw ArgumentError("single_filtering_iteration: budget fields must be >= 1");

  RngStream split_rng = rng.substream(0);
  RngStream search_rng = rng.substream(1);
  RngStream comp_rng = rng.substream(2);

  std::vector<std::size_t> a_idx, b_idx;
  for (std::size_t i = 0; i < n; ++i)
    (split_rng.next_unit() < p ? a_idx : b_idx).push_back(i);

  double tau_f = consts.tau_override >= 0.0
                     ? consts.tau_override
                     : std::floor(consts.tau_scale * static_cast<double>(s) /
                                  std::log(static_cast<double>(std::max<std::size_t>(n, 3))));
  std::size_t tau = static_cast<std::size_t>(std::max(0.0, tau_f));
  double gamma = consts.gamma_override >= 0.0
                     ? consts.gamma_override
                     : consts.gamma_scale * std::sqrt(lambda / static_cast<double>(m));

  // Construction phase sees only a private copy of A's rows; the copy is the sole
  // construct-phase touch of the input, so the access log proves obliviousness.
  std::vector<double> abuf;
  abuf.reserve(a_idx.size() * d);
  for (std::size_t i : a_idx) {
    if (trace) trace->construct_reads.push_back(i);
    const double* r = data.row(i);
    abuf.insert(abuf.end(), r, r + d);
  }
  Dataset a_data(a_idx.size(), d, std::move(abuf));

  std::vector<std::size_t> working = iota_indices(a_data.n());
  std::vector<std::vector<double>> dirs;
  FilterSet built;
  built.gamma = gamma;
  std::size_t total_size = 0, rounds = 0, candidates_used = 0;
  bool all_exact = true;
  double theta = consts.check_scale * consts.check_scale * lambda;

  auto exhaust = [&](const char* why) -> FilterExhaustionError {
    std::size_t removed = a_data.n() - working.size();
    return FilterExhaustionError(
        std::string("single_filtering_iteration: ") + why, built, removed);
  };

  while (true) {
    if (rounds >= 1000)
      throw InvariantError("single_filtering_iteration: round cap exceeded");
    ++rounds;
    if (working.size() < 2) break;

    std::size_t s1_size = std::clamp<std::size_t>(s, 1, working.size() / 2);
    std::size_t s2_size =
        std::clamp<std::size_t>(k / (2 * s1_size), 1, working.size() - s1_size);
    double thr = consts.check_scale *
                 std::sqrt(lambda * static_cast<double>(s1_size * s2_size) *
                           static_cast<double>(d));

    bool exact = working.size() <= 12;
    all_exact = all_exact && exact;
    std::vector<std::size_t> vio_s1, vio_s2;
    bool found = false;
    std::vector<char> in_s1(a_data.n(), 0);

    auto try_s1 = [&](const std::vector<std::size_t>& s1) {
      ++candidates_used;
      for (std::size_t i : s1) in_s1[i] = 1;
      std::vector<double> base = sum_subset(a_data, s1);
      ScoredPool pool = score_pool(a_data, base, in_s1, working);
      for (std::size_t i : s1) in_s1[i] = 0;
      if (pool.sorted.size() < s2_size) return false;
      double value = pool.best_value(s2_size);
      if (std::fabs(value) >= thr) {
        vio_s1 = s1;
        vio_s2 = pool.best_subset(s2_size);
        return true;
      }
      return false;
    };

    if (exact) {
      std::size_t w = working.size();
      for (std::uint32_t mask = 1; mask < (1u << w) && !found; ++mask) {
        if (std::popcount(mask) != static_cast<int>(s1_size)) continue;
        found = try_s1(mask_to_indices(mask, working));
      }
    } else {
      for (std::size_t t = 0; t < budget.max_candidate_collections && !found; ++t) {
        std::vector<std::size_t> pos = sample_subset(working.size(), s1_size, search_rng);
        std::vector<std::size_t> s1;
        for (std::size_t pidx : pos) s1.push_back(working[pidx]);
        found = try_s1(s1);
      }
    }
    if (!found) break;  // working set certified clean at this desk size

    CompressionResult comp =
        witness_compression(a_data, vio_s1, vio_s2, theta, lambda,
                            consts.compression_C, m, comp_rng, budget.max_random_subsets);
    total_size += comp.subset.size();
    std::vector<std::size_t> global;
    for (std::size_t loc : comp.subset) global.push_back(a_idx[loc]);
    built.directions.push_back(std::move(global));
    if (total_size > tau) throw exhaust("filter size budget exhausted");

    std::vector<double> dir = unit_direction(a_data, comp.subset);
    std::vector<std::size_t> next;
    for (std::size_t wl : working)
      if (std::fabs(dot(a_data.row(wl), dir.data(), d)) < gamma) next.push_back(wl);
    if (next.size() == working.size()) throw exhaust("direction removes nothing");
    working = std::move(next);
    dirs.push_back(std::move(dir));
  }

  std::vector<std::size_t> survivors;
  for (std::size_t b : b_idx) {
    if (trace) trace->apply_reads.push_back(b);
    const double* row = data.row(b);
    bool removed = false;
    for (const auto& dir : dirs) {
      if (std::fabs(dot(row, dir.data(), d)) >= gamma) {
        removed = true;
        break;
      }
    }
    if (!removed) survivors.push_back(b);
  }

  if (trace) {
    trace->a_indices = a_idx;
    trace->b_indices = b_idx;
    trace->filter = built;
    trace->rounds = rounds;
    trace->candidates_used = candidates_used;
    trace->exact_pair_search = all_exact;
  }
  return survivors;
}

std::vector<std::size_t> full_sample_splitting(const Dataset& data, double lambda,
                                               std::size_t m, double delta,
                                               RngStream& rng, const SearchBudget& budget,
                                               const FilterConstants& consts) {
  std::size_t n = data.n();
  if (m < 1 || m > n) throw ArgumentError("full_sample_splitting: need 1 <= m <= n");
  if (!(lambda > 0.0)) throw ArgumentError("full_sample_splitting: lambda > 0");
  SplittingSchedule sched = splitting_schedule(n, m, delta);

  std::vector<std::size_t> cur = iota_indices(n);
  std::uint64_t iter = 0;
  for (std::size_t k = sched.k0; k <= m * m; k *= 2) {
    for (std::size_t s = sched.s0; s <= m; s *= 2) {
      if (cur.empty()) return cur;
      Dataset sub = data.subset(cur);
      RngStream it_rng = rng.substream(iter++);
      std::vector<std::size_t> loc = single_filtering_iteration(
          sub, lambda, m, k, s, sched.p, it_rng, budget, consts, nullptr);
      std::vector<std::size_t> mapped;
      mapped.reserve(loc.size());
      for (std::size_t l : loc) mapped.push_back(cur[l]);
      cur = std::move(mapped);
    }
  }
  return cur;
}

std::vector<std::size_t> prefilter_norms_pairs(const Dataset& data, double norm_dev,
                                               double pair_bound) {
  if (!(norm_dev > 0.0) || !(pair_bound > 0.0))
    throw ArgumentError("prefilter_norms_pairs: thresholds must be positive");
  std::size_t n = data.n(), d = data.d();
  double dd = static_cast<double>(d);
  std::vector<char> drop(n, 0);
  // Each i scans all j != i, so the pair removal needs no cross-thread writes.
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(norm2(data.row(i), d) - dd) >= norm_dev) {
      drop[i] = 1;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (std::fabs(dot(data.row(i), data.row(j), d)) >= pair_bound) {
        drop[i] = 1;
        break;
      }
    }
  }
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) survivors.push_back(i);
  return survivors;
}

}  // namespace rmt
