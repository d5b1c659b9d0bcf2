#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mare {

/// Deterministic random stream. The mt19937_64 output sequence is pinned by
/// the standard; the uniform/normal transforms are hand-rolled because the
/// std::*_distribution algorithms are implementation-defined, which would
/// break byte-identical reruns across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Per-sample sub-seed so that any failing sample reproduces in isolation.
inline std::uint64_t sample_seed(std::uint64_t base, std::uint64_t index, std::uint64_t salt) {
  std::uint64_t x = base ^ (0x9E3779B97F4A7C15ull * (index + 1)) ^ (salt << 32);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  return x;
}

}  // namespace mare
