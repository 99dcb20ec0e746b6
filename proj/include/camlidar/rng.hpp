#pragma once

#include <cmath>
#include <cstdint>

namespace camlidar {

// SplitMix64 (Steele, Lea, Flood 2014; public-domain reference implementation).
// Used instead of <random> engines + distributions because the standard
// distributions are implementation-defined: the same seed yields different
// streams under libstdc++, libc++ and MSVC. Every stochastic component of the
// library must replay bit-identically from a seed, so both the engine and the
// variate mappings below are fixed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Deterministic variate generator. Draw order is part of every caller's
// contract: inserting or reordering draws changes downstream results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_.next(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_.next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi); returns exactly lo when lo == hi.
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // Unbiased integer in [0, n) via rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v = engine_.next();
    while (v >= limit) v = engine_.next();
    return v % n;
  }

  // Standard normal via the Box-Muller transform (trigonometric form).
  // Draws two uniforms and caches the second variate.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  SplitMix64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Derives an independent stream seed from a base seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  SplitMix64 mix(base ^ (0x6a09e667f3bcc909ull + stream * 0x9e3779b97f4a7c15ull));
  mix.next();
  return mix.next();
}

}  // namespace camlidar
