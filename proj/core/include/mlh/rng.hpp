#pragma once

#include <cstdint>

namespace mlh {

/// Deterministic splitmix64 generator.
///
/// Every draw is a pure function of the 64-bit state, so streams can be
/// re-created at arbitrary counter positions: `Rng::at(seed, i)` yields the
/// same values no matter how work is chunked across threads. No libm calls
/// are involved, which keeps all derived uniforms bit-identical across
/// platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Stream positioned at counter `index` of the given seed. Used for
  /// per-point / per-record randomness that must not depend on iteration
  /// order.
  static Rng at(std::uint64_t seed, std::uint64_t index) {
    return Rng(seed + (index + 1) * kGamma);
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t state_;
};

}  // namespace mlh
