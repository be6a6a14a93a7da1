#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "rmt/common.hpp"
#include "rmt/lower_bounds.hpp"
#include "rmt/rng.hpp"
#include "rmt/sampling.hpp"

namespace {

double choose(std::size_t m, std::size_t r) {
  double c = 1.0;
  for (std::size_t i = 0; i < r; ++i)
    c = c * static_cast<double>(m - i) / static_cast<double>(i + 1);
  return c;
}

// Central moments of Binomial(n, p) by the independence recursion: adding one
// Bernoulli(p) term updates E(Y - EY)^m through the binomial expansion against
// the centered Bernoulli moments. Shares nothing with the pmf-pass route.
double central_moment_by_recursion(std::size_t n, double p, std::size_t m) {
  std::vector<double> bern(m + 1);
  for (std::size_t j = 0; j <= m; ++j)
    bern[j] = p * std::pow(1.0 - p, static_cast<double>(j)) +
              (1.0 - p) * std::pow(-p, static_cast<double>(j));
  std::vector<double> mom(m + 1, 0.0);
  mom[0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> next(m + 1, 0.0);
    for (std::size_t mm = 0; mm <= m; ++mm)
      for (std::size_t r = 0; r <= mm; ++r)
        next[mm] += choose(mm, r) * mom[r] * bern[mm - r];
    mom = next;
  }
  return mom[m];
}

}  // namespace

TEST_CASE("set_beta solves the coupling quadratic in rationalized form") {
  // x = alpha^2 n / (d eps) = 3/4 exactly; the root is (x / (1 + 1/2)) / n = 1/(2n).
  CHECK(rmt::set_beta(1.5, 0.25, 20, 240) == 1.0 / 40.0);
  CHECK(rmt::set_beta(0.0, 0.3, 50, 100) == 0.0);

  rmt::RngStream r(12);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 10 + r.next_below(500), d = 100 + r.next_below(5000);
    double eps = 0.05 + 0.4 * r.next_unit();
    double amax = std::sqrt(static_cast<double>(d) * eps / static_cast<double>(n));
    double alpha = 0.9 * amax * r.next_unit();
    if (alpha == 0.0) continue;
    double beta = rmt::set_beta(alpha, eps, n, d);
    CHECK(beta > 0.0);
    CHECK(beta < 1.0 / static_cast<double>(n));
    double nn = static_cast<double>(n), dd = static_cast<double>(d);
    double res = alpha * alpha * nn - 2.0 * beta * dd * eps * nn +
                 beta * beta * dd * eps * nn * nn;
    CHECK(std::fabs(res) <= 1e-10 * alpha * alpha * nn);
  }
}

TEST_CASE("set_beta rejects parameters outside the root's existence range") {
  CHECK_THROWS_AS(rmt::set_beta(2.0, 0.1, 100, 1000), rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::set_beta(1.0, 0.1, 10, 100), rmt::ArgumentError);  // x = 1
  rmt::ObliviousLBConfig bad;
  bad.n = 50;
  bad.d = 100;
  bad.eps = 0.0;
  bad.alpha = 0.1;
  CHECK_THROWS_AS(rmt::set_beta(bad), rmt::ArgumentError);
  rmt::ObliviousLBConfig ok;
  ok.n = 160;
  ok.d = 5000;
  ok.eps = 0.1;
  ok.alpha = 0.3;
  CHECK(rmt::set_beta(ok) == rmt::set_beta(0.3, 0.1, 160, 5000));
}

TEST_CASE("determinant identity is exact in the decoupled corners") {
  // alpha = beta = 0: both routes reduce to d^2 with no rounding.
  rmt::IdentityCheck c = rmt::det_identity_check(0.0, 0.0, 0.1, 0.05, 50, 200);
  CHECK(c.ok);
  CHECK(c.lhs == 40000.0);
  CHECK(c.rhs == 40000.0);

  // beta = 0, gamma = eps: lhs = d^2 - ((1-eps) alpha^2 n)^2 by hand.
  rmt::IdentityCheck c2 = rmt::det_identity_check(0.4, 0.0, 0.2, 0.2, 60, 300);
  CHECK(c2.ok);
  CHECK(c2.lhs == doctest::Approx(89941.0176).epsilon(1e-12));
}

TEST_CASE("determinant identity holds across random parameters") {
  rmt::RngStream r(11);
  std::size_t failures = 0;
  for (int i = 0; i < 2000; ++i) {
    double alpha = r.next_unit(), eps = r.next_unit(), gamma = eps * r.next_unit();
    std::size_t n = 10 + r.next_below(991), d = 10 + r.next_below(9991);
    double beta = 0.1 / static_cast<double>(n) * r.next_unit();
    rmt::IdentityCheck c = rmt::det_identity_check(alpha, beta, eps, gamma, n, d);
    if (!c.ok) ++failures;
  }
  CHECK(failures == 0);
  double nan = std::nan("");
  CHECK_THROWS_AS(rmt::det_identity_check(nan, 0.0, 0.1, 0.05, 10, 10),
                  rmt::ArgumentError);
}

TEST_CASE("dropping the quadratic group from the bracket is invisible at set_beta") {
  rmt::RngStream r(12);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 10 + r.next_below(500), d = 100 + r.next_below(5000);
    double eps = 0.05 + 0.4 * r.next_unit();
    double amax = std::sqrt(static_cast<double>(d) * eps / static_cast<double>(n));
    double alpha = 0.9 * amax * r.next_unit();
    if (alpha == 0.0) continue;
    double beta = rmt::set_beta(alpha, eps, n, d);
    double gamma = eps * r.next_unit();
    rmt::IdentityCheck c = rmt::det_identity_check(alpha, beta, eps, gamma, n, d);
    double nn = static_cast<double>(n), dd = static_cast<double>(d);
    double a2 = alpha * alpha, b2 = beta * beta, n2 = nn * nn;
    double first = dd + b2 * dd * (eps * eps - gamma) * n2;
    double big_trunc = -2.0 * a2 * eps * nn + a2 * gamma * nn +
                       2.0 * beta * dd * gamma * nn -
                       2.0 * b2 * dd * eps * eps * n2 + b2 * dd * eps * gamma * n2;
    double lhs_trunc = first * first - big_trunc * big_trunc;
    CHECK(std::fabs(lhs_trunc - c.lhs) <= 1e-9 * std::max(1.0, std::fabs(c.lhs)));
  }
}

TEST_CASE("huber t statistic matches the per-point overlap weights exactly") {
  // Dyadic eps and alpha make both routes exact in floating point, so the
  // simplified form must agree bitwise with the three-class weighting
  // eps^2 |S cap T| - eps(1-eps) |S xor T| + (1-eps)^2 |(S cup T)^c|.
  const std::size_t n = 50;
  const double eps = 0.25, alpha = 0.5;
  rmt::RngStream rng(1234);
  for (int it = 0; it < 1000; ++it) {
    std::size_t a = rng.next_below(n + 1), b = rng.next_below(n + 1);
    std::vector<std::size_t> s = rmt::sample_subset(n, a, rng);
    std::vector<std::size_t> t = rmt::sample_subset(n, b, rng);
    std::vector<char> in_s(n, 0);
    for (std::size_t i : s) in_s[i] = 1;
    std::size_t inter = 0;
    for (std::size_t i : t) inter += in_s[i];
    std::size_t symdiff = a + b - 2 * inter;
    std::size_t y = n - a - b + inter;
    double t_set = alpha * alpha / (eps * eps) *
                   (eps * eps * static_cast<double>(inter) -
                    eps * (1.0 - eps) * static_cast<double>(symdiff) +
                    (1.0 - eps) * (1.0 - eps) * static_cast<double>(y));
    CHECK(t_set == rmt::huber_t_statistic(y, a, b, n, alpha, eps));
  }
}

TEST_CASE("huber chi2 estimate matches the closed form when eps vanishes") {
  // With eps ~ 0 the size window pins a = b = n and y = 0, so every draw
  // evaluates the integrand at t = alpha^2 n.
  rmt::HuberLBConfig cfg;
  cfg.n = 10;
  cfg.d = 50;
  cfg.eps = 1e-9;
  cfg.alpha = 0.1;
  cfg.trials = 200;
  rmt::RngStream rng(13);
  rmt::Chi2Estimate est = rmt::huber_chi2_estimate(cfg, rng);
  double t = cfg.alpha * cfg.alpha * 10.0;
  double closed = std::pow(1.0 - (t / 50.0) * (t / 50.0), -25.0);
  CHECK(est.estimate == doctest::Approx(closed).epsilon(1e-9));
  CHECK(est.stderr_ <= 1e-12);
  CHECK_FALSE(est.diverged);
}

TEST_CASE("huber chi2 estimate certifies indistinguishability at the target scale") {
  // n = 0.1 * d eps^3 / alpha^4: chi-square within 1 + o(1), so no tester with
  // these resources can separate the pair.
  rmt::HuberLBConfig cfg;
  cfg.n = 1250;
  cfg.d = 20000;
  cfg.eps = 0.1;
  cfg.alpha = 0.2;
  cfg.trials = 100000;
  rmt::RngStream rng(14);
  rmt::Chi2Estimate est = rmt::huber_chi2_estimate(cfg, rng);
  CHECK_FALSE(est.diverged);
  CHECK(est.stderr_ > 0.0);
  CHECK(est.stderr_ < 1e-3);
  CHECK(est.estimate + 3.0 * est.stderr_ <= 1.01);
  // Chi-square divergence of any pair against itself-plus-signal is >= 1.
  CHECK(est.estimate >= 1.0 - 3.0 * est.stderr_);
}

TEST_CASE("huber chi2 estimate flags divergence when the statistic reaches d") {
  rmt::HuberLBConfig cfg;
  cfg.n = 20;
  cfg.d = 2;
  cfg.eps = 0.4;
  cfg.alpha = 0.9;
  cfg.trials = 50;
  rmt::RngStream rng(40);
  rmt::Chi2Estimate est = rmt::huber_chi2_estimate(cfg, rng);
  CHECK(est.diverged);
  CHECK(std::isinf(est.estimate));
}

TEST_CASE("huber chi2 estimate validates its configuration") {
  rmt::HuberLBConfig below_eps;
  below_eps.n = 100;
  below_eps.d = 500;
  below_eps.eps = 0.3;
  below_eps.alpha = 0.2;
  rmt::RngStream rng(1);
  CHECK_THROWS_AS(rmt::huber_chi2_estimate(below_eps, rng), rmt::ArgumentError);

  rmt::HuberLBConfig narrow = below_eps;
  narrow.alpha = 0.4;
  narrow.K = 99.0;
  CHECK_THROWS_AS(rmt::huber_chi2_estimate(narrow, rng), rmt::ArgumentError);

  rmt::HuberLBConfig none = below_eps;
  none.alpha = 0.4;
  none.trials = 0;
  CHECK_THROWS_AS(rmt::huber_chi2_estimate(none, rng), rmt::ArgumentError);

  rmt::HuberLBConfig empty = below_eps;
  empty.alpha = 0.4;
  empty.n = 0;
  CHECK_THROWS_AS(rmt::huber_chi2_estimate(empty, rng), rmt::ArgumentError);
}

TEST_CASE("oblivious chi2 estimate is exactly one in the decoupled configuration") {
  // alpha = beta = 0 collapses the integrand to 1 for every overlap.
  rmt::ObliviousLBConfig cfg;
  cfg.n = 50;
  cfg.d = 100;
  cfg.eps = 0.2;
  cfg.alpha = 0.0;
  cfg.beta = 0.0;
  cfg.trials = 500;
  rmt::RngStream rng(16);
  rmt::Chi2Estimate est = rmt::oblivious_chi2_estimate(cfg, rng);
  CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(est.stderr_ == 0.0);
  CHECK_FALSE(est.diverged);
}

TEST_CASE("oblivious chi2 estimate certifies indistinguishability at the target scale") {
  rmt::ObliviousLBConfig cfg;
  cfg.n = 160;
  cfg.d = 5000;
  cfg.eps = 0.1;
  cfg.alpha = 0.3;
  cfg.trials = 100000;  // beta derived internally
  rmt::RngStream rng(15);
  rmt::Chi2Estimate est = rmt::oblivious_chi2_estimate(cfg, rng);
  CHECK_FALSE(est.diverged);
  CHECK(est.stderr_ > 0.0);
  CHECK(est.stderr_ < 1e-3);
  CHECK(est.estimate + 3.0 * est.stderr_ <= 1.01);
  CHECK(est.estimate >= 1.0 - 3.0 * est.stderr_);
}

TEST_CASE("oblivious chi2 estimate grows with the sample count") {
  const std::size_t grid[] = {50, 100, 150, 200, 250};
  double prev = 0.0;
  for (std::size_t n : grid) {
    rmt::ObliviousLBConfig cfg;
    cfg.n = n;
    cfg.d = 2000;
    cfg.eps = 0.1;
    cfg.alpha = 0.25;
    cfg.trials = 20000;
    rmt::RngStream rng(17);  // common random numbers across grid points
    rmt::Chi2Estimate est = rmt::oblivious_chi2_estimate(cfg, rng);
    CHECK_FALSE(est.diverged);
    CHECK(est.estimate >= 1.0 - 3.0 * est.stderr_);
    CHECK(est.estimate > prev);
    prev = est.estimate;
  }
}

TEST_CASE("oblivious chi2 estimate validates its configuration") {
  rmt::RngStream rng(2);

  rmt::ObliviousLBConfig frac;
  frac.n = 156;  // eps * n = 15.6: the planted-set size must be integral
  frac.d = 5000;
  frac.eps = 0.1;
  frac.alpha = 0.3;
  frac.trials = 100;
  CHECK_THROWS_AS(rmt::oblivious_chi2_estimate(frac, rng), rmt::ArgumentError);

  rmt::ObliviousLBConfig coupled;
  coupled.n = 50;
  coupled.d = 5000;
  coupled.eps = 0.2;
  coupled.alpha = 0.1;
  coupled.beta = 0.2 / 50.0;  // above the 0.1/n admissibility cap
  coupled.trials = 100;
  CHECK_THROWS_AS(rmt::oblivious_chi2_estimate(coupled, rng), rmt::ArgumentError);

  rmt::ObliviousLBConfig loud;
  loud.n = 60;
  loud.d = 100;
  loud.eps = 0.2;
  loud.alpha = 1.0;  // alpha^2 n = 60 > 0.1 d
  loud.beta = 0.0;
  loud.trials = 100;
  CHECK_THROWS_AS(rmt::oblivious_chi2_estimate(loud, rng), rmt::ArgumentError);

  rmt::ObliviousLBConfig none;
  none.n = 160;
  none.d = 5000;
  none.eps = 0.1;
  none.alpha = 0.3;
  none.trials = 0;
  CHECK_THROWS_AS(rmt::oblivious_chi2_estimate(none, rng), rmt::ArgumentError);
}

TEST_CASE("binomial central moments match the independence recursion") {
  CHECK(rmt::binomial_central_moment(10, 0.3, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(rmt::binomial_central_moment(10, 0.3, 1)) < 1e-12);
  CHECK(rmt::binomial_central_moment(10, 0.3, 2) == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(rmt::binomial_central_moment(10, 0.3, 3) == doctest::Approx(0.84).epsilon(1e-12));
  CHECK(rmt::binomial_central_moment(10, 0.3, 4) ==
        doctest::Approx(12.684).epsilon(1e-12));

  const std::size_t ns[] = {10, 25};
  const double ps[] = {0.3, 0.6};
  for (int i = 0; i < 2; ++i)
    for (std::size_t m = 2; m <= 8; ++m)
      CHECK(rmt::binomial_central_moment(ns[i], ps[i], m) ==
            doctest::Approx(central_moment_by_recursion(ns[i], ps[i], m))
                .epsilon(1e-9));

  CHECK(rmt::binomial_central_moment(10, 0.0, 3) == 0.0);
  CHECK(rmt::binomial_central_moment(10, 1.0, 3) == 0.0);
  CHECK(rmt::binomial_central_moment(0, 0.5, 2) == 0.0);
  CHECK_THROWS_AS(rmt::binomial_central_moment(10, 1.5, 2), rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::binomial_central_moment(10, 0.5, 21), rmt::ArgumentError);
}

TEST_CASE("low degree norm bound vanishes at degree one") {
  // Odd-degree terms vanish by sign symmetry of the planted direction, so the
  // D = 1 truncation carries no power at all.
  rmt::LowDegreeConfig cfg;
  cfg.n = 2000;
  cfg.d = 500;
  cfg.eps = 0.1;
  cfg.alpha = 0.2;
  cfg.D = 1;
  CHECK(rmt::lowdegree_norm_bound(cfg, rmt::LowDegreeMode::ExactMoments) == 0.0);
  CHECK(rmt::lowdegree_norm_bound(cfg, rmt::LowDegreeMode::RosenthalBound) == 0.0);
}

TEST_CASE("exact moments never exceed the rosenthal route") {
  rmt::LowDegreeConfig base;
  base.n = 2000;
  base.d = 500;
  base.eps = 0.1;
  base.alpha = 0.2;
  base.D = 4;

  double exact_base = rmt::lowdegree_norm_bound(base, rmt::LowDegreeMode::ExactMoments);
  double ros_base = rmt::lowdegree_norm_bound(base, rmt::LowDegreeMode::RosenthalBound);
  CHECK(exact_base == doctest::Approx(24.323).epsilon(1e-3));
  CHECK(ros_base == doctest::Approx(1490.7).epsilon(1e-3));

  // Same split, the moments swapped for their upper bounds: domination must
  // hold pointwise, and both directions of the scaling must survive it.
  double prev_d = -1.0;
  for (std::size_t d = 200; d <= 3200; d *= 2) {
    rmt::LowDegreeConfig cfg = base;
    cfg.d = d;
    double exact = rmt::lowdegree_norm_bound(cfg, rmt::LowDegreeMode::ExactMoments);
    double ros = rmt::lowdegree_norm_bound(cfg, rmt::LowDegreeMode::RosenthalBound);
    CHECK(exact <= ros);
    if (prev_d >= 0.0) CHECK(exact < prev_d);  // decreasing in d
    prev_d = exact;
  }
  double prev_n = -1.0;
  for (std::size_t n = 500; n <= 4000; n *= 2) {
    rmt::LowDegreeConfig cfg = base;
    cfg.n = n;
    double exact = rmt::lowdegree_norm_bound(cfg, rmt::LowDegreeMode::ExactMoments);
    double ros = rmt::lowdegree_norm_bound(cfg, rmt::LowDegreeMode::RosenthalBound);
    CHECK(exact <= ros);
    if (prev_n >= 0.0) CHECK(exact > prev_n);  // increasing in n
    prev_n = exact;
  }
}

TEST_CASE("low degree norm bound validates its configuration") {
  rmt::LowDegreeConfig deep;
  deep.n = 2000;
  deep.d = 500;
  deep.eps = 0.1;
  deep.alpha = 0.2;
  deep.D = 11;  // 2D > 20: pmf pass no longer trustworthy
  CHECK_THROWS_AS(rmt::lowdegree_norm_bound(deep, rmt::LowDegreeMode::ExactMoments),
                  rmt::ArgumentError);
  CHECK(rmt::lowdegree_norm_bound(deep, rmt::LowDegreeMode::RosenthalBound) > 0.0);

  rmt::LowDegreeConfig bad = deep;
  bad.D = 4;
  bad.eps = 0.0;
  CHECK_THROWS_AS(rmt::lowdegree_norm_bound(bad, rmt::LowDegreeMode::ExactMoments),
                  rmt::ArgumentError);
  rmt::LowDegreeConfig flat = deep;
  flat.D = 4;
  flat.sphere_c = 0.0;
  CHECK_THROWS_AS(rmt::lowdegree_norm_bound(flat, rmt::LowDegreeMode::RosenthalBound),
                  rmt::ArgumentError);
}

TEST_CASE("mgf determinant oracle is exact for the zero matrix") {
  std::vector<double> zero(9, 0.0);
  rmt::RngStream rng(18);
  rmt::OracleCheck c = rmt::mgf_det_check(zero, 3, 1000, rng);
  CHECK(c.mc == 1.0);
  CHECK(c.closed_form == 1.0);
  CHECK(c.rel_err == 0.0);
}

TEST_CASE("mgf determinant oracle matches in one dimension") {
  std::vector<double> one{1.0};
  rmt::RngStream rng(19);
  rmt::OracleCheck c = rmt::mgf_det_check(one, 1, 200000, rng);
  CHECK(c.closed_form == 1.0 / std::sqrt(2.0));
  CHECK(c.rel_err <= 0.01);

  // Negative but admissible direction: the closed form still applies.
  std::vector<double> neg{-0.5};
  rmt::RngStream rng2(22);
  rmt::OracleCheck c2 = rmt::mgf_det_check(neg, 1, 1000, rng2);
  CHECK(c2.closed_form == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::isfinite(c2.mc));
}

TEST_CASE("mgf determinant oracle matches on a random psd matrix") {
  rmt::RngStream brng(20);
  std::vector<double> b(9);
  for (double& v : b) v = 0.5 * brng.next_gaussian();
  std::vector<double> m(9, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) m[i * 3 + j] += b[k * 3 + i] * b[k * 3 + j];
  rmt::RngStream rng(21);
  rmt::OracleCheck c = rmt::mgf_det_check(m, 3, 1000000, rng);
  CHECK(c.closed_form > 0.0);
  CHECK(c.closed_form < 1.0);
  CHECK(c.rel_err <= 0.02);
}

TEST_CASE("mgf determinant oracle rejects matrices outside the admissible cone") {
  rmt::RngStream rng(3);
  std::vector<double> low{-1.5};
  CHECK_THROWS_AS(rmt::mgf_det_check(low, 1, 100, rng), rmt::ArgumentError);
  std::vector<double> skew{0.0, 1.0, 0.0, 0.0};
  CHECK_THROWS_AS(rmt::mgf_det_check(skew, 2, 100, rng), rmt::ArgumentError);
  std::vector<double> short_m{1.0, 0.0, 0.0};
  CHECK_THROWS_AS(rmt::mgf_det_check(short_m, 2, 100, rng), rmt::ArgumentError);
  std::vector<double> fine{0.5};
  CHECK_THROWS_AS(rmt::mgf_det_check(fine, 1, 0, rng), rmt::ArgumentError);
}

TEST_CASE("shifted gaussian oracle is exact in the degenerate configuration") {
  std::vector<double> s{0.0, 0.0};
  rmt::RngStream rng(23);
  rmt::OracleCheck c = rmt::shifted_gaussian_integral_check(0.0, s, 1.0, 100, rng);
  CHECK(c.mc == 1.0);
  CHECK(c.closed_form == 1.0);
  CHECK(c.rel_err == 0.0);
}

TEST_CASE("shifted gaussian oracle matches the closed form with no shift") {
  std::vector<double> s{0.0, 0.0, 0.0};
  rmt::RngStream rng(24);
  rmt::OracleCheck c = rmt::shifted_gaussian_integral_check(0.7, s, 1.3, 1000000, rng);
  CHECK(c.closed_form ==
        doctest::Approx(std::pow(0.7 * 1.69 + 1.0, -1.5)).epsilon(1e-12));
  CHECK(c.rel_err <= 0.02);
}

TEST_CASE("shifted gaussian oracle reduces to the gaussian mgf with no decay") {
  // a = 0: the closed form is exp(delta^2 ||s||^2 / 2), the mgf of N(0, delta^2 I)
  // in direction s.
  std::vector<double> s{0.3, -0.2, 0.5};
  rmt::RngStream rng(25);
  rmt::OracleCheck c = rmt::shifted_gaussian_integral_check(0.0, s, 0.8, 1000000, rng);
  double snorm2 = 0.09 + 0.04 + 0.25;
  CHECK(c.closed_form == doctest::Approx(std::exp(0.64 * snorm2 / 2.0)).epsilon(1e-12));
  CHECK(c.rel_err <= 0.02);
}

TEST_CASE("shifted gaussian oracle validates its arguments") {
  rmt::RngStream rng(4);
  std::vector<double> s{0.1};
  CHECK_THROWS_AS(rmt::shifted_gaussian_integral_check(-1.0, s, 1.0, 100, rng),
                  rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::shifted_gaussian_integral_check(0.5, s, 0.0, 100, rng),
                  rmt::ArgumentError);
  std::vector<double> empty;
  CHECK_THROWS_AS(rmt::shifted_gaussian_integral_check(0.5, empty, 1.0, 100, rng),
                  rmt::ArgumentError);
  CHECK_THROWS_AS(rmt::shifted_gaussian_integral_check(0.5, s, 1.0, 0, rng),
                  rmt::ArgumentError);
}
