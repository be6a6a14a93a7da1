#include "rmt/kernels.hpp"

#include <cmath>

namespace rmt {

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

double norm2(const double* a, std::size_t d) { return dot(a, a, d); }

double norm(const double* a, std::size_t d) { return std::sqrt(norm2(a, d)); }

std::vector<double> sum_subset(const Dataset& data, const std::vector<std::size_t>& idx) {
  std::vector<double> s(data.d(), 0.0);
  for (std::size_t i : idx) {
    if (i >= data.n()) throw ArgumentError("sum_subset: index out of range");
    const double* r = data.row(i);
    for (std::size_t k = 0; k < data.d(); ++k) s[k] += r[k];
  }
  return s;
}

namespace {

std::vector<double> sqrt_weights(const Dataset& data, const Weights& w) {
  validate_weights(w, data.n());
  std::vector<double> sw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sw[i] = std::sqrt(w[i]);
  return sw;
}

// Shared per-entry arithmetic: coordinate block [j0, j1) of Sum_i sw_i X_i,
// accumulated in row order. Both variants call this, so they agree bitwise.
void weighted_sum_block(const Dataset& data, const std::vector<double>& sw,
                        std::size_t j0, std::size_t j1, double* out) {
  for (std::size_t j = j0; j < j1; ++j) out[j] = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    double c = sw[i];
    if (c == 0.0) continue;
    const double* r = data.row(i);
    for (std::size_t j = j0; j < j1; ++j) out[j] += c * r[j];
  }
}

void gram_row(const Dataset& data, const std::vector<double>& sw, std::size_t i,
              double* G) {
  std::size_t n = data.n(), d = data.d();
  const double* ri = data.row(i);
  for (std::size_t j = 0; j <= i; ++j) {
    double v = (sw[i] == 0.0 || sw[j] == 0.0)
                   ? 0.0
                   : sw[i] * sw[j] * dot(ri, data.row(j), d);
    G[i * n + j] = v;
    G[j * n + i] = v;
  }
}

// Row a of the upper triangle of M(w), accumulated in sample order.
void second_moment_row(const Dataset& data, const Weights& w, std::size_t a,
                       double* M) {
  std::size_t n = data.n(), d = data.d();
  for (std::size_t b = a; b < d; ++b) M[a * d + b] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    const double* r = data.row(i);
    double c = w[i] * r[a];
    if (c == 0.0) continue;
    for (std::size_t b = a; b < d; ++b) M[a * d + b] += c * r[b];
  }
}

void mirror_lower(std::vector<double>& M, std::size_t d) {
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) M[b * d + a] = M[a * d + b];
}

}  // namespace

std::vector<double> weighted_sum(const Dataset& data, const Weights& w) {
  std::vector<double> sw = sqrt_weights(data, w);
  std::size_t d = data.d();
  std::vector<double> out(d);
  // Coordinate blocks sized for cache lines; each block owned by one thread.
  std::size_t block = 256;
  std::size_t nblocks = (d + block - 1) / block;
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < nblocks; ++b) {
    std::size_t j0 = b * block;
    std::size_t j1 = j0 + block < d ? j0 + block : d;
    weighted_sum_block(data, sw, j0, j1, out.data());
  }
  return out;
}

std::vector<double> serial::weighted_sum(const Dataset& data, const Weights& w) {
  std::vector<double> sw = sqrt_weights(data, w);
  std::size_t d = data.d();
  std::vector<double> out(d);
  std::size_t block = 256;
  for (std::size_t j0 = 0; j0 < d; j0 += block) {
    std::size_t j1 = j0 + block < d ? j0 + block : d;
    weighted_sum_block(data, sw, j0, j1, out.data());
  }
  return out;
}

std::vector<double> gram(const Dataset& data, const Weights& w) {
  std::vector<double> sw = sqrt_weights(data, w);
  std::size_t n = data.n();
  std::vector<double> G(n * n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i) gram_row(data, sw, i, G.data());
  return G;
}

std::vector<double> serial::gram(const Dataset& data, const Weights& w) {
  std::vector<double> sw = sqrt_weights(data, w);
  std::size_t n = data.n();
  std::vector<double> G(n * n);
  for (std::size_t i = 0; i < n; ++i) gram_row(data, sw, i, G.data());
  return G;
}

std::vector<double> second_moment(const Dataset& data, const Weights& w) {
  validate_weights(w, data.n());
  std::size_t d = data.d();
  std::vector<double> M(d * d);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t a = 0; a < d; ++a) second_moment_row(data, w, a, M.data());
  mirror_lower(M, d);
  return M;
}

std::vector<double> serial::second_moment(const Dataset& data, const Weights& w) {
  validate_weights(w, data.n());
  std::size_t d = data.d();
  std::vector<double> M(d * d);
  for (std::size_t a = 0; a < d; ++a) second_moment_row(data, w, a, M.data());
  mirror_lower(M, d);
  return M;
}

std::vector<double> symv(const std::vector<double>& A, std::size_t k,
                         const std::vector<double>& x) {
  if (A.size() != k * k || x.size() != k) throw ArgumentError("symv: shape mismatch");
  std::vector<double> y(k);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < k; ++i) y[i] = dot(A.data() + i * k, x.data(), k);
  return y;
}

std::vector<double> serial::symv(const std::vector<double>& A, std::size_t k,
                                 const std::vector<double>& x) {
  if (A.size() != k * k || x.size() != k) throw ArgumentError("symv: shape mismatch");
  std::vector<double> y(k);
  for (std::size_t i = 0; i < k; ++i) y[i] = dot(A.data() + i * k, x.data(), k);
  return y;
}

double frobenius_norm(const std::vector<double>& A) {
  double s = 0.0;
  for (double v : A) s += v * v;
  return std::sqrt(s);
}

}  // namespace rmt
