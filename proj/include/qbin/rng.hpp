#pragma once

#include <cstdint>

namespace qbin {

/// Small portable generator (splitmix64 stream). Identical output on every
/// platform for a given seed, independent of the standard library's
/// distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (two uniforms per draw).
  double normal();

  /// Exponential with unit mean.
  double exponential();

 private:
  std::uint64_t state_;
};

}  // namespace qbin
