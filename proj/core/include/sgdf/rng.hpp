#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sgdf {

/**
 * Counter-based pseudo-random stream.
 *
 * Output n (1-based) of stream (seed, stream_id) is
 *
 *     mix(key + n * kGamma),   key = mix(seed ^ mix(stream_id ^ kStreamSalt))
 *
 * where mix is the SplitMix64 finalizer (Steele et al., "Fast Splittable
 * Pseudorandom Number Generators", OOPSLA 2014). Every output is a pure
 * function of (seed, stream_id, n), so a stream replays identically across
 * runs and platforms at the integer level, and distinct stream_ids give
 * decorrelated streams for parallel work without coordination.
 *
 * Float mappings (frozen; see rng_reference.py under tests/oracles):
 *   uniform01 : top 53 bits of one output, scaled into [0, 1).
 *   normal    : Box-Muller cosine branch; consumes exactly two outputs,
 *               with u1 shifted into (0, 1] so the log is finite.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(mix(seed ^ mix(stream_id ^ kStreamSalt))) {}

  std::uint64_t next_u64() { return mix(key_ + ++counter_ * kGamma); }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  double normal() {
    const double u1 =
        static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 =
        static_cast<double>(next_u64() >> 11) * 0x1.0p-53;  // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Rademacher +/-1 from the top bit of one output.
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  std::uint64_t draws_consumed() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kStreamSalt = 0x5851F42D4C957F2Dull;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sgdf
