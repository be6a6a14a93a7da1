#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "rmt/common.hpp"
#include "rmt/contamination.hpp"
#include "rmt/dataset.hpp"
#include "rmt/friendly_filter.hpp"
#include "rmt/lower_bounds.hpp"
#include "rmt/kernels.hpp"
#include "rmt/rng.hpp"
#include "rmt/sampling.hpp"

namespace {

rmt::Dataset make_gaussian(std::size_t n, std::size_t d, std::uint64_t seed,
                           double scale = 1.0) {
  rmt::RngStream rng(seed);
  std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, rng);
  if (scale != 1.0)
    for (double& v : buf) v *= scale;
  return rmt::Dataset(n, d, std::move(buf));
}

void set_row(std::vector<double>& buf, std::size_t d, std::size_t i,
             const std::vector<double>& row) {
  std::copy(row.begin(), row.end(), buf.begin() + i * d);
}

std::vector<double> axis_row(std::size_t d, std::size_t axis, double value) {
  std::vector<double> r(d, 0.0);
  r[axis] = value;
  return r;
}

// Oracle-side inner product of subset sums, written with plain loops on purpose.
double plain_pair_ip(const rmt::Dataset& data, const std::vector<std::size_t>& s1,
                     const std::vector<std::size_t>& s2) {
  double acc = 0.0;
  for (std::size_t i : s1)
    for (std::size_t j : s2)
      for (std::size_t c = 0; c < data.d(); ++c) acc += data.at(i, c) * data.at(j, c);
  return acc;
}

// Exhaustive (lambda, m, k)-balancedness check by ternary assignment: every point
// goes to neither set, S1, or S2. Independent of the library's subset search.
bool enum_balanced_has_violation(const rmt::Dataset& data, double lambda,
                                 std::size_t m, std::size_t k) {
  std::size_t n = data.n();
  std::vector<int> assign(n, 0);
  while (true) {
    std::vector<std::size_t> s1, s2;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] == 1) s1.push_back(i);
      if (assign[i] == 2) s2.push_back(i);
    }
    if (!s1.empty() && !s2.empty() && s1.size() <= m && s2.size() <= m &&
        s1.size() * s2.size() <= k) {
      double ip = plain_pair_ip(data, s1, s2);
      double bound = std::sqrt(lambda * static_cast<double>(s1.size() * s2.size()) *
                               static_cast<double>(data.d()));
      if (std::fabs(ip) > bound) return true;
    }
    std::size_t pos = 0;
    while (pos < n && assign[pos] == 2) {
      assign[pos] = 0;
      ++pos;
    }
    if (pos == n) return false;
    ++assign[pos];
  }
}

// Exhaustive friendliness check, same ternary walk for the cross-sum clause plus
// plain scans for the pairwise and norm clauses.
bool enum_friendly_ok(const rmt::Dataset& data, double eps, double kappa) {
  std::size_t n = data.n(), d = data.d();
  double dd = static_cast<double>(d);
  double sqd = std::sqrt(dd);
  for (std::size_t i = 0; i < n; ++i) {
    double nn = 0.0;
    for (std::size_t c = 0; c < d; ++c) nn += data.at(i, c) * data.at(i, c);
    if (std::fabs(nn - dd) > kappa * sqd) return false;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double ip = 0.0;
      for (std::size_t c = 0; c < d; ++c) ip += data.at(i, c) * data.at(j, c);
      if (std::fabs(ip) > kappa * sqd) return false;
    }
  std::size_t kmax = static_cast<std::size_t>(std::floor(eps * static_cast<double>(n)));
  if (kmax == 0) return true;
  double scale = std::max(std::sqrt(eps * static_cast<double>(n) * dd),
                          eps * static_cast<double>(n));
  std::vector<int> assign(n, 0);
  while (true) {
    std::vector<std::size_t> s1, s2;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] == 1) s1.push_back(i);
      if (assign[i] == 2) s2.push_back(i);
    }
    if (!s1.empty() && !s2.empty() && s1.size() <= kmax && s2.size() <= kmax) {
      double ip = plain_pair_ip(data, s1, s2);
      double bound =
          kappa * std::sqrt(static_cast<double>(s1.size() * s2.size())) * scale;
      if (std::fabs(ip) > bound) return false;
    }
    std::size_t pos = 0;
    while (pos < n && assign[pos] == 2) {
      assign[pos] = 0;
      ++pos;
    }
    if (pos == n) return true;
    ++assign[pos];
  }
}

bool disjoint_sorted(std::vector<std::size_t> a, std::vector<std::size_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(inter));
  return inter.empty();
}

}  // namespace

TEST_CASE("default_lambda follows the log formula with a floor at 3") {
  CHECK(rmt::default_lambda(200) == doctest::Approx(36.0 * std::log(200.0)));
  CHECK(rmt::default_lambda(1) == doctest::Approx(36.0 * std::log(3.0)));
  CHECK(rmt::default_lambda(2) == rmt::default_lambda(3));
}

TEST_CASE("BalancedParams validation rejects bad shapes") {
  rmt::BalancedParams p{10.0, 5, 25};
  CHECK_NOTHROW(p.validate(10));
  rmt::BalancedParams bad_lambda{0.0, 5, 25};
  rmt::BalancedParams bad_m0{10.0, 0, 25};
  rmt::BalancedParams bad_m_big{10.0, 11, 25};
  rmt::BalancedParams bad_k{10.0, 5, 0};
  CHECK_THROWS_AS(bad_lambda.validate(10), rmt::ArgumentError);
  CHECK_THROWS_AS(bad_m0.validate(10), rmt::ArgumentError);
  CHECK_THROWS_AS(bad_m_big.validate(10), rmt::ArgumentError);
  CHECK_THROWS_AS(bad_k.validate(10), rmt::ArgumentError);
}

TEST_CASE("check_friendly flags a planted norm violation with its witness") {
  std::size_t n = 8, d = 32;
  rmt::RngStream rng(11);
  std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, rng);
  set_row(buf, d, 5, axis_row(d, 0, std::sqrt(3.0 * d)));  // norm^2 = 3d
  rmt::Dataset data(n, d, std::move(buf));
  rmt::RngStream search(1);
  auto rep = rmt::check_friendly(data, 0.3, 6.0, {rmt::SearchMode::Exact, 0}, search);
  CHECK_FALSE(rep.norm_ok);
  CHECK_FALSE(rep.ok);
  CHECK(rep.worst_norm_i == 5);
  CHECK(rep.worst_norm_value == doctest::Approx(2.0 * d));
}

TEST_CASE("check_friendly flags a planted pairwise violation") {
  std::size_t n = 8, d = 32;
  rmt::RngStream rng(12);
  std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, rng);
  // Two rows sharing an axis spike: inner product d, far above kappa sqrt(d).
  set_row(buf, d, 2, axis_row(d, 3, std::sqrt(static_cast<double>(d))));
  set_row(buf, d, 6, axis_row(d, 3, std::sqrt(static_cast<double>(d))));
  rmt::Dataset data(n, d, std::move(buf));
  rmt::RngStream search(1);
  auto rep = rmt::check_friendly(data, 0.3, 4.0, {rmt::SearchMode::Exact, 0}, search);
  CHECK_FALSE(rep.inner_product_ok);
  CHECK(rep.worst_ip_i == 2);
  CHECK(rep.worst_ip_j == 6);
  CHECK(rep.worst_ip_value == doctest::Approx(static_cast<double>(d)));
}

TEST_CASE("check_friendly accepts clean Gaussian data at a generous kappa") {
  rmt::Dataset data = make_gaussian(12, 200, 21);
  rmt::RngStream search(2);
  auto rep = rmt::check_friendly(data, 0.25, 6.0, {rmt::SearchMode::Exact, 0}, search);
  CHECK(rep.ok);
  CHECK(rep.cross_sum_ok);
  CHECK(rep.inner_product_ok);
  CHECK(rep.norm_ok);
  // The worst witnesses are populated even on a pass.
  CHECK(rep.worst_pair_bound > 0.0);
  CHECK(std::fabs(rep.worst_pair_value) <= rep.worst_pair_bound);
}

TEST_CASE("check_friendly mode guards") {
  rmt::Dataset big = make_gaussian(17, 8, 3);
  rmt::RngStream rng(4);
  CHECK_THROWS_AS(rmt::check_friendly(big, 0.2, 3.0, {rmt::SearchMode::Exact, 0}, rng),
                  rmt::CapacityError);
  rmt::Dataset small = make_gaussian(6, 8, 5);
  CHECK_THROWS_AS(
      rmt::check_friendly(small, 0.2, 3.0, {rmt::SearchMode::Randomized, 0}, rng),
      rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::check_friendly(small, 1.0, 3.0, {rmt::SearchMode::Exact, 0}, rng),
                  rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::check_friendly(small, 0.2, 0.0, {rmt::SearchMode::Exact, 0}, rng),
                  rmt::ArgumentError);
}

TEST_CASE("check_friendly exact mode agrees with the ternary enumerator") {
  int violations = 0, passes = 0;
  for (int t = 0; t < 16; ++t) {
    std::size_t n = 4 + static_cast<std::size_t>(t % 6);
    std::size_t d = 5 + static_cast<std::size_t>(t % 5);
    double kappa = (t % 2 == 0) ? 7.0 : 1.1;
    double scale = (t % 3 == 0) ? 1.7 : 1.0;
    rmt::Dataset data = make_gaussian(n, d, 100 + static_cast<std::uint64_t>(t), scale);
    rmt::RngStream search(200 + static_cast<std::uint64_t>(t));
    auto rep = rmt::check_friendly(data, 0.34, kappa, {rmt::SearchMode::Exact, 0}, search);
    bool oracle = enum_friendly_ok(data, 0.34, kappa);
    CHECK(rep.ok == oracle);
    (oracle ? passes : violations) += 1;
  }
  CHECK(violations > 0);
  CHECK(passes > 0);
}

TEST_CASE("check_balanced exact mode agrees with the ternary enumerator") {
  int violations = 0, passes = 0;
  for (int t = 0; t < 24; ++t) {
    std::size_t n = 4 + static_cast<std::size_t>(t % 6);
    std::size_t d = 5 + static_cast<std::size_t>(t % 5);
    double lambda = (t % 3 == 0) ? 4.0 : 40.0;
    double scale = (t % 2 == 0) ? 2.4 : 1.0;
    std::size_t m = 2 + static_cast<std::size_t>(t % 3);
    rmt::BalancedParams params{lambda, std::min(m, n), std::min(m, n) * std::min(m, n)};
    rmt::Dataset data = make_gaussian(n, d, 300 + static_cast<std::uint64_t>(t), scale);
    rmt::RngStream search(400 + static_cast<std::uint64_t>(t));
    auto found =
        rmt::check_balanced(data, params, {rmt::SearchMode::Exact, 0}, search);
    bool oracle = enum_balanced_has_violation(data, lambda, params.m, params.k);
    CHECK(found.has_value() == oracle);
    if (found) {
      // The returned witness must itself be a genuine violation.
      CHECK(found->s1.size() <= params.m);
      CHECK(found->s2.size() <= params.m);
      CHECK(found->s1.size() * found->s2.size() <= params.k);
      CHECK(disjoint_sorted(found->s1, found->s2));
      double ip = plain_pair_ip(data, found->s1, found->s2);
      CHECK(ip == doctest::Approx(found->value).epsilon(1e-9));
      CHECK(std::fabs(found->value) > found->bound);
      ++violations;
    } else {
      ++passes;
    }
  }
  CHECK(violations > 0);
  CHECK(passes > 0);
}

TEST_CASE("check_balanced randomized search finds a planted spike cluster") {
  std::size_t n = 60, d = 64;
  rmt::RngStream rng(31);
  std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, rng);
  // Eight identical spikes: any split of them gives correlated subset sums.
  for (std::size_t i = 0; i < 8; ++i)
    set_row(buf, d, i * 7, axis_row(d, 1, std::sqrt(static_cast<double>(d))));
  rmt::Dataset data(n, d, std::move(buf));
  rmt::BalancedParams params{rmt::default_lambda(n), 6, 36};
  rmt::RngStream search(32);
  auto found =
      rmt::check_balanced(data, params, {rmt::SearchMode::Randomized, 2000}, search);
  REQUIRE(found.has_value());
  CHECK(std::fabs(plain_pair_ip(data, found->s1, found->s2)) > found->bound);

  rmt::Dataset clean = make_gaussian(n, d, 33);
  rmt::RngStream search2(34);
  CHECK_FALSE(
      rmt::check_balanced(clean, params, {rmt::SearchMode::Randomized, 2000}, search2)
          .has_value());
}

TEST_CASE("apply_filter projection semantics") {
  std::size_t d = 16;
  std::vector<double> buf;
  auto push = [&](const std::vector<double>& r) { buf.insert(buf.end(), r.begin(), r.end()); };
  push(axis_row(d, 0, 4.0));   // row 0: along e0
  push(axis_row(d, 1, 4.0));   // row 1: orthogonal
  push(axis_row(d, 0, -3.0));  // row 2: anti-aligned
  push(axis_row(d, 0, 1.0));   // row 3: small overlap
  rmt::Dataset data(4, d, buf);

  rmt::FilterSet f;
  f.directions = {{0}};  // direction e0 realized from row 0
  f.gamma = 2.0;
  auto surv = rmt::apply_filter(data, f, data);
  CHECK(surv == std::vector<std::size_t>{1, 3});

  SUBCASE("idempotent on the survivor set") {
    rmt::Dataset kept = data.subset(surv);
    auto again = rmt::apply_filter(kept, f, data);
    CHECK(again.size() == kept.n());
  }
  SUBCASE("gamma = 0 removes everything once a direction exists") {
    f.gamma = 0.0;
    CHECK(rmt::apply_filter(data, f, data).empty());
  }
  SUBCASE("no directions removes nothing") {
    rmt::FilterSet empty;
    empty.gamma = 0.0;
    CHECK(rmt::apply_filter(data, empty, data).size() == 4);
  }
  SUBCASE("bad filters are rejected") {
    rmt::FilterSet badidx;
    badidx.directions = {{9}};
    badidx.gamma = 1.0;
    CHECK_THROWS_AS(rmt::apply_filter(data, badidx, data), rmt::ArgumentError);
    rmt::FilterSet emptydir;
    emptydir.directions = {{}};
    emptydir.gamma = 1.0;
    CHECK_THROWS_AS(rmt::apply_filter(data, emptydir, data), rmt::ArgumentError);
    rmt::FilterSet neg;
    neg.directions = {{0}};
    neg.gamma = -1.0;
    CHECK_THROWS_AS(rmt::apply_filter(data, neg, data), rmt::ArgumentError);
  }
  SUBCASE("zero-sum direction is rejected") {
    std::vector<double> zbuf;
    zbuf.insert(zbuf.end(), buf.begin(), buf.begin() + d);
    for (std::size_t c = 0; c < d; ++c) zbuf.push_back(-buf[c]);
    rmt::Dataset ref(2, d, zbuf);
    rmt::FilterSet f2;
    f2.directions = {{0, 1}};
    f2.gamma = 1.0;
    CHECK_THROWS_AS(rmt::apply_filter(data, f2, ref), rmt::ArgumentError);
  }
}

TEST_CASE("filter set JSON round-trip and rejection of malformed text") {
  rmt::FilterSet f;
  f.gamma = 3.75;
  f.directions = {{0, 4, 17}, {2}, {5, 6}};
  std::string text = rmt::filter_set_to_json(f);
  rmt::FilterSet back = rmt::filter_set_from_json(text);
  CHECK(back.gamma == f.gamma);
  CHECK(back.directions == f.directions);

  CHECK_THROWS_AS(rmt::filter_set_from_json("not json"), rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::filter_set_from_json("{\"gamma\": 1.0}"), rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::filter_set_from_json("{\"gamma\": 1.0, \"directions\": 3}"),
                  rmt::ArgumentError);
  CHECK_THROWS_AS(
      rmt::filter_set_from_json("{\"gamma\": 1.0, \"directions\": [[-2]]}"),
      rmt::ArgumentError);
}

TEST_CASE("witness_compression concentrates a planted correlated pair") {
  std::size_t n = 20, d = 64;
  double spike = 2.0 * std::sqrt(static_cast<double>(d));
  rmt::RngStream rng(41);
  std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, rng);
  for (std::size_t i = 0; i < 16; ++i) set_row(buf, d, i, axis_row(d, 0, spike));
  rmt::Dataset data(n, d, buf);
  std::vector<std::size_t> s1{0, 1, 2, 3, 4, 5};
  std::vector<std::size_t> s2{6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  double lambda = 100.0, theta = lambda / 16.0, C = 1.0;
  std::size_t m = 8;
  rmt::RngStream comp(42);
  auto res = rmt::witness_compression(data, s1, s2, theta, lambda, C, m, comp, 200);

  CHECK(res.threshold ==
        doctest::Approx(std::sqrt(theta) / (16.0 * std::sqrt(C * static_cast<double>(m)))));
  CHECK(res.lemma_target == doctest::Approx(theta * 10.0 / (80.0 * lambda)));
  CHECK(res.subset.size() >= 1);
  CHECK(res.subset.size() <= static_cast<std::size_t>(
            std::ceil(60.0 / (C * static_cast<double>(m)))));
  for (std::size_t i : res.subset) CHECK(std::count(s1.begin(), s1.end(), i) == 1);
  CHECK(res.count == s2.size());
  CHECK(static_cast<double>(res.count) >= res.lemma_target);

  SUBCASE("negative correlation is handled by flipping the direction") {
    std::vector<double> nbuf = buf;
    for (std::size_t i = 6; i < 16; ++i) set_row(nbuf, d, i, axis_row(d, 0, -spike));
    rmt::Dataset ndata(n, d, std::move(nbuf));
    rmt::RngStream comp2(43);
    auto nres = rmt::witness_compression(ndata, s1, s2, theta, lambda, C, m, comp2, 200);
    CHECK(nres.count == s2.size());
  }
  SUBCASE("preconditions") {
    rmt::Dataset clean = make_gaussian(n, d, 44);
    rmt::RngStream comp3(45);
    // Near-orthogonal subset sums sit far below the correlation floor.
    CHECK_THROWS_AS(
        rmt::witness_compression(clean, s1, s2, theta, lambda, C, m, comp3, 50),
        rmt::ArgumentError);
    CHECK_THROWS_AS(
        rmt::witness_compression(data, s1, {5, 6}, theta, lambda, C, m, comp3, 50),
        rmt::ArgumentError);
    CHECK_THROWS_AS(
        rmt::witness_compression(data, s1, s2, 2.0 * lambda, lambda, C, m, comp3, 50),
        rmt::ArgumentError);
    CHECK_THROWS_AS(
        rmt::witness_compression(data, s1, s2, theta, lambda, 0.5, m, comp3, 50),
        rmt::ArgumentError);
  }
}

TEST_CASE("single_filtering_iteration argument validation") {
  rmt::Dataset data = make_gaussian(20, 8, 51);
  rmt::RngStream rng(52);
  rmt::SearchBudget budget;
  CHECK_THROWS_AS(
      rmt::single_filtering_iteration(data, 0.0, 4, 16, 2, 0.3, rng, budget),
      rmt::ArgumentError);
  CHECK_THROWS_AS(
      rmt::single_filtering_iteration(data, 10.0, 0, 16, 2, 0.3, rng, budget),
      rmt::ArgumentError);
  CHECK_THROWS_AS(
      rmt::single_filtering_iteration(data, 10.0, 4, 16, 2, 1.5, rng, budget),
      rmt::ArgumentError);
  rmt::SearchBudget zero{0, 1};
  CHECK_THROWS_AS(
      rmt::single_filtering_iteration(data, 10.0, 4, 16, 2, 0.3, rng, zero),
      rmt::ArgumentError);
}

TEST_CASE("single_filtering_iteration leaves clean data untouched and never reads B "
          "during construction") {
  std::size_t n = 300, d = 96;
  rmt::Dataset data = make_gaussian(n, d, 61);
  rmt::SearchBudget budget{200, 100};
  rmt::IterationTrace trace;
  rmt::RngStream rng(62);
  auto survivors = rmt::single_filtering_iteration(data, 600.0, 30, 250, 5, 0.1, rng,
                                                   budget, {}, &trace);

  CHECK(trace.a_indices.size() + trace.b_indices.size() == n);
  CHECK(survivors == trace.b_indices);
  CHECK(trace.filter.directions.empty());
  CHECK(trace.rounds == 1);
  CHECK_FALSE(trace.exact_pair_search);

  // Obliviousness contract: construction touches only A rows.
  std::set<std::size_t> bset(trace.b_indices.begin(), trace.b_indices.end());
  for (std::size_t i : trace.construct_reads) CHECK(bset.count(i) == 0);
  CHECK(trace.apply_reads == trace.b_indices);

  SUBCASE("same stream reproduces the run, a different substream reshuffles it") {
    rmt::RngStream rng2(62);
    rmt::IterationTrace trace2;
    auto survivors2 = rmt::single_filtering_iteration(data, 600.0, 30, 250, 5, 0.1,
                                                      rng2, budget, {}, &trace2);
    CHECK(survivors2 == survivors);
    CHECK(trace2.a_indices == trace.a_indices);

    rmt::RngStream other = rmt::RngStream(62).substream(9);
    rmt::IterationTrace trace3;
    rmt::single_filtering_iteration(data, 600.0, 30, 250, 5, 0.1, other, budget, {},
                                    &trace3);
    CHECK(trace3.a_indices != trace.a_indices);
  }
}

TEST_CASE("single_filtering_iteration removes a planted cluster from B") {
  std::size_t n = 160, d = 64;
  double spike = 2.0 * std::sqrt(static_cast<double>(d));
  rmt::RngStream gen(71);
  std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, gen);
  std::set<std::size_t> cluster;
  for (std::size_t i = 0; i < 16; ++i) {
    cluster.insert(i * 10);
    set_row(buf, d, i * 10, axis_row(d, 0, spike));
  }
  rmt::Dataset data(n, d, std::move(buf));

  rmt::FilterConstants consts;
  consts.tau_override = 16.0;
  consts.gamma_override = 8.0;
  rmt::SearchBudget budget{300, 200};
  rmt::IterationTrace trace;
  rmt::RngStream rng(72);
  auto survivors = rmt::single_filtering_iteration(data, 1600.0, 16, 128, 4, 0.5, rng,
                                                   budget, consts, &trace);

  CHECK_FALSE(trace.filter.directions.empty());
  std::set<std::size_t> surv(survivors.begin(), survivors.end());
  std::size_t cluster_in_b = 0;
  for (std::size_t b : trace.b_indices) {
    if (cluster.count(b)) {
      ++cluster_in_b;
      CHECK(surv.count(b) == 0);  // every planted B member filtered
    } else {
      CHECK(surv.count(b) == 1);  // every clean B member kept
    }
  }
  CHECK(cluster_in_b >= 1);
  CHECK(trace.rounds <= 6);

  std::set<std::size_t> bset(trace.b_indices.begin(), trace.b_indices.end());
  for (std::size_t i : trace.construct_reads) CHECK(bset.count(i) == 0);

  SUBCASE("zero size budget turns the same run into an exhaustion failure") {
    rmt::FilterConstants tight = consts;
    tight.tau_override = 0.0;
    rmt::RngStream rng2(72);
    try {
      rmt::single_filtering_iteration(data, 1600.0, 16, 128, 4, 0.5, rng2, budget,
                                      tight, nullptr);
      FAIL("expected FilterExhaustionError");
    } catch (const rmt::FilterExhaustionError& e) {
      CHECK_FALSE(e.best_filter.directions.empty());
    }
  }
}

TEST_CASE("single_filtering_iteration never removes good points of contaminated data") {
  rmt::TestParams params;
  params.n = 200;
  params.d = 128;
  params.alpha = 0.05;
  params.eps = 0.05;
  auto lb = rmt::ObliviousLBParams::from(
      params, rmt::set_beta(params.alpha, params.eps, params.n, params.d));
  double lambda = rmt::default_lambda(params.n);
  auto sched = rmt::splitting_schedule(params.n, 10, 0.01);
  rmt::SearchBudget budget;
  int exhausted = 0;
  for (int t = 0; t < 100; ++t) {
    rmt::RngStream gen = rmt::RngStream(91).substream(static_cast<std::uint64_t>(t));
    auto lds = rmt::gen_oblivious_lb(params, lb, gen);
    rmt::RngStream run = rmt::RngStream(92).substream(static_cast<std::uint64_t>(t));
    rmt::IterationTrace trace;
    try {
      auto surv = rmt::single_filtering_iteration(lds.data, lambda, 10, sched.k0,
                                                  sched.s0, sched.p, run, budget, {},
                                                  &trace);
      std::set<std::size_t> kept(surv.begin(), surv.end());
      for (std::size_t b : trace.b_indices)
        if (!lds.bad_mask[b]) CHECK(kept.count(b) == 1);
    } catch (const rmt::FilterExhaustionError&) {
      ++exhausted;  // no output produced, nothing removed
    }
  }
  CHECK(exhausted <= 10);  // sanity: most trials must actually produce output
}

TEST_CASE("splitting_schedule matches its formulas and is monotone in delta") {
  std::size_t n = 200, m = 10;
  auto sched = rmt::splitting_schedule(n, m, 0.01);
  double L = std::ceil(std::log(static_cast<double>(n * m) / 0.01));
  CHECK(sched.k0 == std::min(m * m, m * static_cast<std::size_t>(L)));
  CHECK(sched.s0 == std::min(m, std::max<std::size_t>(2, static_cast<std::size_t>(L))));
  double lm = std::log(static_cast<double>(m));
  CHECK(sched.p == doctest::Approx(1.0 / (5.0 * lm * lm)));

  auto loose = rmt::splitting_schedule(n, m, 0.2);
  CHECK(sched.k0 >= loose.k0);
  CHECK(sched.s0 >= loose.s0);
  CHECK(sched.p == loose.p);

  CHECK_THROWS_AS(rmt::splitting_schedule(0, m, 0.01), rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::splitting_schedule(n, m, 0.0), rmt::ArgumentError);
}

TEST_CASE("full_sample_splitting removes only the discarded split on clean data") {
  // eps = 0.05: the construction split A is thrown away by design, so "clean data
  // survives" means removals stay within 2 floor(eps n) and nothing is filtered
  // beyond that structural discard.
  std::size_t n = 200, d = 128, m = 10;
  double lambda = rmt::default_lambda(n);
  double lg = std::log(static_cast<double>(n) * 1000.0);
  double norm_dev = 10.0 * std::sqrt(static_cast<double>(d) * lg);
  double pair_bound = 10.0 * std::sqrt(static_cast<double>(d)) * lg;
  rmt::SearchBudget budget;

  auto sched = rmt::splitting_schedule(n, m, 0.01);
  CHECK(sched.k0 == m * m);  // desk schedule collapses to a single iteration
  CHECK(sched.s0 == m);

  int within_bound = 0;
  const int trials = 200;
  const std::size_t allowed = 2 * 10;  // 2 floor(eps n)
  for (int t = 0; t < trials; ++t) {
    rmt::RngStream data_rng = rmt::RngStream(81).substream(static_cast<std::uint64_t>(t));
    std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, data_rng);
    rmt::Dataset data(n, d, std::move(buf));
    auto pre = rmt::prefilter_norms_pairs(data, norm_dev, pair_bound);
    rmt::Dataset kept = data.subset(pre);
    rmt::RngStream run_rng = rmt::RngStream(82).substream(static_cast<std::uint64_t>(t));
    try {
      auto out = rmt::full_sample_splitting(kept, lambda, m, 0.01, run_rng, budget);
      if (n - out.size() <= allowed) ++within_bound;
    } catch (const rmt::FilterExhaustionError&) {
      // counts as a failed trial
    }
  }
  CHECK(within_bound >= 190);

  // Fidelity on one trial: the output is exactly the B side of the same-seed
  // iteration, i.e. the filter itself removed nothing.
  rmt::RngStream data_rng = rmt::RngStream(81).substream(0);
  std::vector<double> buf = rmt::sample_gaussian_matrix(n, d, data_rng);
  rmt::Dataset data(n, d, std::move(buf));
  rmt::RngStream run_rng = rmt::RngStream(82).substream(0);
  auto out = rmt::full_sample_splitting(data, lambda, m, 0.01, run_rng, budget);
  rmt::IterationTrace trace;
  rmt::RngStream replay = rmt::RngStream(82).substream(0).substream(0);
  auto direct = rmt::single_filtering_iteration(data, lambda, m, sched.k0, sched.s0,
                                                sched.p, replay, budget, {}, &trace);
  CHECK(out == direct);
  CHECK(out == trace.b_indices);

  // Survivors satisfy the balancedness the pipeline targets.
  rmt::Dataset kept = data.subset(out);
  rmt::BalancedParams params{lambda, m, m * m};
  rmt::RngStream search(83);
  CHECK_FALSE(
      rmt::check_balanced(kept, params, {rmt::SearchMode::Randomized, 300}, search)
          .has_value());
}

TEST_CASE("prefilter_norms_pairs removes exactly the planted offenders") {
  std::size_t d = 16;
  std::vector<double> buf;
  auto push = [&](const std::vector<double>& r) { buf.insert(buf.end(), r.begin(), r.end()); };
  push(axis_row(d, 0, 4.0));
  push(axis_row(d, 1, 4.0));
  push(axis_row(d, 2, 4.0));
  push(axis_row(d, 3, 4.0));
  push(axis_row(d, 4, 6.0));  // norm^2 = 36, deviation 20
  push(axis_row(d, 5, 4.0));  // paired with row 6
  push(axis_row(d, 5, 4.0));
  rmt::Dataset data(7, d, std::move(buf));
  auto surv = rmt::prefilter_norms_pairs(data, 10.0, 10.0);
  CHECK(surv == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK_THROWS_AS(rmt::prefilter_norms_pairs(data, 0.0, 10.0), rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::prefilter_norms_pairs(data, 10.0, 0.0), rmt::ArgumentError);
}

TEST_CASE("prefilter_norms_pairs leaves clean Gaussian data alone") {
  std::size_t n = 500, d = 400;
  double lg = std::log(static_cast<double>(n) * 1000.0);
  double norm_dev = 10.0 * std::sqrt(static_cast<double>(d) * lg);
  double pair_bound = 10.0 * std::sqrt(static_cast<double>(d)) * lg;
  for (int t = 0; t < 20; ++t) {
    rmt::Dataset data = make_gaussian(n, d, 900 + static_cast<std::uint64_t>(t));
    auto surv = rmt::prefilter_norms_pairs(data, norm_dev, pair_bound);
    CHECK(surv.size() == n);
  }
}
