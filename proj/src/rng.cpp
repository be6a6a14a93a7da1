#include "rmt/rng.hpp"

#include <cmath>

namespace rmt {
namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer: full-avalanche 64-bit permutation.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {
  base_ = mix64(mix64(seed + kGamma) + mix64(stream_id ^ 0x6a09e667f3bcc909ULL));
}

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(seed_, mix64(stream_ * kGamma + mix64(id + 0xbb67ae8584caa73bULL)));
}

std::uint64_t RngStream::value_at(std::uint64_t ctr) const {
  return mix64(base_ + (ctr + 1) * kGamma);
}

double RngStream::unit_at(std::uint64_t ctr) const {
  return static_cast<double>(value_at(ctr) >> 11) * 0x1.0p-53;
}

double RngStream::gaussian_at(std::uint64_t ctr) const {
  // 1 - u in (0, 1] keeps the log finite.
  double u1 = 1.0 - unit_at(ctr);
  double u2 = unit_at(ctr + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw ArgumentError("next_below: bound must be positive");
  std::uint64_t rem = (UINT64_MAX % bound + 1) % bound;  // 2^64 mod bound
  std::uint64_t limit = UINT64_MAX - rem;
  for (;;) {
    std::uint64_t v = next_u64();
    if (v <= limit) return v % bound;
  }
}

}  // namespace rmt
