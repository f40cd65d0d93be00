#pragma once

#include <cmath>
#include <cstdint>

namespace gdl::rng {

// splitmix64 step (Vigna). Bijective mixer, also used to derive stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sequential random stream keyed by (seed, a, b).
//
// Streams with distinct keys are independent for practical purposes, which
// is what row-keyed rendering relies on: results do not depend on how rows
// are scheduled across threads. All samplers are hand-rolled so the byte
// output is stable across standard library implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    state_ = seed;
    (void)splitmix64(state_);
    state_ ^= 0xd1342543de82ef95ULL * (a + 1);
    (void)splitmix64(state_);
    state_ ^= 0xaf251af3b0f025b5ULL * (b + 1);
    (void)splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1], for use under log().
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Consumes two uniforms per call.
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Poisson sample. Knuth's product method below 30, Hormann's PTRS
  // transformed rejection above (the draw count per sample then stays O(1)).
  long long poisson(double mean);

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift with rejection of the biased band.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      const unsigned __int128 m = static_cast<unsigned __int128>(r) * n;
      if (static_cast<std::uint64_t>(m) >= threshold)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }

 private:
  std::uint64_t state_ = 0;
};

inline long long Stream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    const double limit = std::exp(-mean);
    long long k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }
  // PTRS (Hormann 1993), same scheme numpy uses.
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform_pos();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        kf * loglam - mean - std::lgamma(kf + 1.0)) {
      return static_cast<long long>(kf);
    }
  }
}

}  // namespace gdl::rng
