// Compares the OpenMP kernels against their serial reference implementations:
// wall time for each variant plus a bitwise-equality check of the outputs.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rmt/kernels.hpp"
#include "rmt/sampling.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Row {
  const char* kernel;
  double serial_ms;
  double parallel_ms;
  bool identical;
};

void print_row(const Row& r) {
  std::printf("%-16s %12.1f %12.1f %10.2fx   %s\n", r.kernel, r.serial_ms,
              r.parallel_ms, r.serial_ms / r.parallel_ms,
              r.identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 1200, d = 600;
  int reps = 3;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--n" && i + 1 < argc) n = std::stoul(argv[++i]);
    else if (a == "--d" && i + 1 < argc) d = std::stoul(argv[++i]);
    else if (a == "--reps" && i + 1 < argc) reps = std::stoi(argv[++i]);
    else {
      std::fprintf(stderr, "usage: rmt_bench [--n N] [--d D] [--reps R]\n");
      return 2;
    }
  }
#ifdef _OPENMP
  std::printf("n=%zu d=%zu reps=%d threads=%d\n", n, d, reps, omp_get_max_threads());
#else
  std::printf("n=%zu d=%zu reps=%d (OpenMP disabled)\n", n, d, reps);
#endif
  std::printf("%-16s %12s %12s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

  rmt::RngStream rng(20260822, 0);
  rmt::RngStream rng2 = rng;  // same positions for the serial fill
  auto t0 = Clock::now();
  std::vector<double> buf;
  for (int r = 0; r < reps; ++r) buf = rmt::sample_gaussian_matrix(n, d, rng);
  double fill_par = ms_since(t0) / reps;
  t0 = Clock::now();
  std::vector<double> buf_s;
  for (int r = 0; r < reps; ++r) buf_s = rmt::serial::sample_gaussian_matrix(n, d, rng2);
  double fill_ser = ms_since(t0) / reps;
  print_row({"gaussian_fill", fill_ser, fill_par, bitwise_equal(buf, buf_s)});

  rmt::Dataset data(n, d, buf);
  rmt::Weights w(n, 1.0);

  t0 = Clock::now();
  std::vector<double> g_par;
  for (int r = 0; r < reps; ++r) g_par = rmt::gram(data, w);
  double gram_par = ms_since(t0) / reps;
  t0 = Clock::now();
  std::vector<double> g_ser;
  for (int r = 0; r < reps; ++r) g_ser = rmt::serial::gram(data, w);
  double gram_ser = ms_since(t0) / reps;
  print_row({"gram", gram_ser, gram_par, bitwise_equal(g_par, g_ser)});

  t0 = Clock::now();
  std::vector<double> m_par;
  for (int r = 0; r < reps; ++r) m_par = rmt::second_moment(data, w);
  double sm_par = ms_since(t0) / reps;
  t0 = Clock::now();
  std::vector<double> m_ser;
  for (int r = 0; r < reps; ++r) m_ser = rmt::serial::second_moment(data, w);
  double sm_ser = ms_since(t0) / reps;
  print_row({"second_moment", sm_ser, sm_par, bitwise_equal(m_par, m_ser)});

  t0 = Clock::now();
  std::vector<double> ws_par;
  for (int r = 0; r < reps; ++r) ws_par = rmt::weighted_sum(data, w);
  double wsum_par = ms_since(t0) / reps;
  t0 = Clock::now();
  std::vector<double> ws_ser;
  for (int r = 0; r < reps; ++r) ws_ser = rmt::serial::weighted_sum(data, w);
  double wsum_ser = ms_since(t0) / reps;
  print_row({"weighted_sum", wsum_ser, wsum_par, bitwise_equal(ws_par, ws_ser)});

  std::vector<double> x(d, 1.0);
  t0 = Clock::now();
  std::vector<double> y_par;
  for (int r = 0; r < reps; ++r) y_par = rmt::symv(m_par, d, x);
  double symv_par = ms_since(t0) / reps;
  t0 = Clock::now();
  std::vector<double> y_ser;
  for (int r = 0; r < reps; ++r) y_ser = rmt::serial::symv(m_ser, d, x);
  double symv_ser = ms_since(t0) / reps;
  print_row({"symv", symv_ser, symv_par, bitwise_equal(y_par, y_ser)});

  bool all_ok = bitwise_equal(buf, buf_s) && bitwise_equal(g_par, g_ser) &&
                bitwise_equal(m_par, m_ser) && bitwise_equal(ws_par, ws_ser) &&
                bitwise_equal(y_par, y_ser);
  std::printf("%s\n", all_ok ? "all kernels bit-identical" : "kernel mismatch detected");
  return all_ok ? 0 : 1;
}
