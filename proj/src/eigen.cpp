#include "rmt/eigen.hpp"

#include <cmath>

namespace rmt {
namespace {

std::vector<double> random_unit(std::size_t k, RngStream& rng) {
  std::vector<double> v(k);
  for (;;) {
    for (std::size_t i = 0; i < k; ++i) v[i] = rng.next_gaussian();
    double nv = norm(v.data(), k);
    if (nv > 0.0) {
      for (double& x : v) x /= nv;
      return v;
    }
  }
}

SingularPair power_iterate(const std::vector<double>& A, std::size_t k, RngStream& rng,
                           double tol, std::size_t max_iter, bool* converged) {
  if (A.size() != k * k || k == 0)
    throw ArgumentError("top_singular_pair: A must be k x k with k >= 1");
  double fnorm = frobenius_norm(A);
  std::vector<double> v = random_unit(k, rng);
  SingularPair best;
  best.vector = v;
  *converged = false;
  if (fnorm == 0.0) {  // zero matrix: every unit vector is an eigenvector for 0
    *converged = true;
    return best;
  }
  best.residual = fnorm;
  std::size_t restarts = 0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    std::vector<double> w = symv(A, k, v);
    double lambda = dot(v.data(), w.data(), k);
    double r2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double e = w[i] - lambda * v[i];
      r2 += e * e;
    }
    double r = std::sqrt(r2);
    if (r < best.residual || best.iterations == 0) {
      best.value = std::fabs(lambda);
      best.signed_value = lambda;
      best.vector = v;
      best.residual = r;
      best.iterations = it;
    }
    if (r <= tol * fnorm) {
      *converged = true;
      return best;
    }
    double nw = norm(w.data(), k);
    if (nw == 0.0) {
      // Landed exactly in the nullspace; restart from a fresh direction.
      if (++restarts > 3) break;
      v = random_unit(k, rng);
      continue;
    }
    for (std::size_t i = 0; i < k; ++i) v[i] = w[i] / nw;
  }
  best.iterations = max_iter;
  return best;
}

}  // namespace

SingularPair top_singular_pair(const std::vector<double>& A, std::size_t k,
                               RngStream& rng, double tol, std::size_t max_iter) {
  bool ok = false;
  SingularPair p = power_iterate(A, k, rng, tol, max_iter, &ok);
  if (!ok)
    throw ConvergenceError("top_singular_pair: residual above tolerance after max_iter",
                           p.value, p.vector, p.residual);
  return p;
}

SingularPair spectral_norm_estimate(const std::vector<double>& A, std::size_t k,
                                    RngStream& rng, double tol, std::size_t max_iter) {
  bool ok = false;
  return power_iterate(A, k, rng, tol, max_iter, &ok);
}

}  // namespace rmt
