#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cqed {

// Random substream for one experimental cycle. Each cycle gets its own
// engine derived from (seed, stream_id), so parallel and serial execution
// produce identical event streams. All samplers are implemented on top of
// the raw mt19937_64 output because the std::* distributions do not
// guarantee a reproducible sequence across standard libraries.
class CycleRng {
 public:
  CycleRng(std::uint64_t seed, std::uint64_t stream_id)
      : engine_(mix(seed, stream_id)) {}

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Exponential variate with the given rate (1/s).
  double exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Poisson count by summing unit-exponential arrivals until they exceed
  // the mean. O(mean), exact for any mean that fits the caller's patience.
  std::int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::int64_t n = 0;
    double acc = 0.0;
    for (;;) {
      acc += -std::log1p(-uniform());
      if (acc > mean) return n;
      ++n;
    }
  }

  std::uint64_t raw() { return engine_(); }

 private:
  // splitmix64 finalizer; decorrelates neighbouring (seed, stream) pairs.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace cqed
