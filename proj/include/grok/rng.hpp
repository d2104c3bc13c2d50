#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace grok {

// Seeded random stream. std::mt19937_64 is fully pinned by the standard and
// the float mappings below avoid std::*_distribution, whose sequences are
// implementation-defined; the same seed therefore yields the same samples on
// every platform. Single-owner: one stream per run, never shared.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t position() const { return position_; }

  std::uint64_t next_u64() {
    ++position_;
    return gen_();
  }

  // Uniform on (0, 1], 53-bit resolution. The open lower end keeps log() safe.
  double uniform01() {
    const std::uint64_t x = next_u64() >> 11;
    return static_cast<double>(x + 1) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) via rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = -n % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  // Standard normal via Box-Muller. One variate per pair of uniforms, so the
  // stream position fully determines the state (no cached spare).
  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t position_ = 0;
  std::mt19937_64 gen_;
};

}  // namespace grok
