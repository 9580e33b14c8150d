#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stereorig {

/// xorshift64* generator (Vigna 2014). The sequence is fixed by the seed so
/// procedural scenes reproduce exactly across builds and platforms.
class Xorshift64Star {
public:
  explicit Xorshift64Star(std::uint64_t seed) noexcept {
    // splitmix64 scramble; keeps seed 0 away from the all-zero fixed point.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    state_ = z ^ (z >> 31);
    if (state_ == 0)
      state_ = 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() noexcept {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::uint64_t state_;
};

} // namespace stereorig
