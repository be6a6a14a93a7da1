#pragma once

#include <cstdint>

#include "rmt/common.hpp"

namespace rmt {

// Counter-based splittable generator. A stream is identified by (seed, stream_id);
// draw i is a pure function of (seed, stream_id, i). That gives O(1) random access,
// so parallel fills evaluate absolute positions and reproduce bit-identically at any
// thread count, and substreams are cheap to derive without touching the parent.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t counter() const { return ctr_; }

  // Derived stream over the same seed; fresh counter. Chaining substream(a).substream(b)
  // yields a different stream than substream(b).substream(a).
  RngStream substream(std::uint64_t id) const;

  std::uint64_t next_u64() { return value_at(ctr_++); }
  // Uniform on [0, 1), 53-bit resolution.
  double next_unit() { return unit_at(ctr_++); }
  // Standard normal via Box-Muller; consumes exactly 2 counter positions.
  double next_gaussian() {
    double g = gaussian_at(ctr_);
    ctr_ += 2;
    return g;
  }
  // Uniform on [0, bound), exact (rejection).
  std::uint64_t next_below(std::uint64_t bound);

  // Absolute-position access used by parallel fills. Does not advance the counter.
  std::uint64_t value_at(std::uint64_t ctr) const;
  double unit_at(std::uint64_t ctr) const;
  // Reads positions ctr and ctr+1.
  double gaussian_at(std::uint64_t ctr) const;

  void skip(std::uint64_t count) { ctr_ += count; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t base_;
  std::uint64_t ctr_ = 0;
};

}  // namespace rmt
