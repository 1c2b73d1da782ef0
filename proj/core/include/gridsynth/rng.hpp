#pragma once

#include <cstdint>
#include <random>

namespace gridsynth {

// Deterministic RNG used everywhere randomness is needed. mt19937_64 has a
// standard-specified output sequence, and all value mappings below use only
// IEEE arithmetic, so streams are reproducible across platforms. (The library
// <random> distributions are implementation-defined and must not be used.)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Approximately standard-normal deviate via an Irwin-Hall sum of twelve
  // uniforms. Uses only additions, so the result is bit-reproducible on any
  // IEEE platform (unlike Box-Muller, which depends on libm).
  double normal(double mean, double stddev) {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform01();
    return mean + stddev * (s - 6.0);
  }

  // Weighted choice over `weights` (need not be normalized).
  int weighted_choice(const double* weights, int count) {
    double total = 0.0;
    for (int i = 0; i < count; ++i) total += weights[i];
    double r = uniform01() * total;
    for (int i = 0; i < count; ++i) {
      r -= weights[i];
      if (r < 0.0) return i;
    }
    return count - 1;
  }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent per-instance seeds.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace gridsynth
