#pragma once

#include <cmath>
#include <cstdint>

namespace phasebind {

/// Keyed counter stream built on the splitmix64 finalizer.
///
/// A stream is fully determined by (seed, stream), so per-image or
/// per-sample work can own an independent stream and be scheduled in any
/// order (or in parallel) without changing the numbers drawn.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(mix(seed + kGamma) ^ mix(stream ^ 0x6a09e667f3bcc909ull))) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform angle in [-pi, pi).
  double uniform_angle() {
    double a = -kPi + 2.0 * kPi * uniform();
    if (a >= kPi) a = -kPi;  // guard against rounding at the top end
    return a;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace phasebind
