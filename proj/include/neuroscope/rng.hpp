#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace neuroscope {

/// Counter-based generator "ns-ctr64-v1".
///
///   key      = mix(seed ^ 0x6e6575726f73636f)
///   draw(c)  = mix(key + (c + 1) * 0x9e3779b97f4a7c15),   c = 0, 1, 2, ...
///   mix(z)   = SplitMix64 finalizer:
///              z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
///              z ^= z >> 27; z *= 0x94d049bb133111eb; z ^= z >> 31
///
/// uniform(b) draws r until r >= (2^64 - b) mod b and returns r mod b, so
/// every bound is sampled without modulo bias. The sequence is fully
/// determined by (seed, counter) and is stable across platforms.
class CounterRng {
 public:
  static constexpr const char* kName = "ns-ctr64-v1";

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6e6575726f73636fULL)) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t next() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) {
        return r % bound;
      }
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per two draws).
  double normal() {
    double u1 = unit();
    while (u1 <= 0.0) {
      u1 = unit();
    }
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace neuroscope
