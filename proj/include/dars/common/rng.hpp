#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace dars {

// Seeded random stream. Every consumer of randomness gets its own named
// substream derived from the single experiment seed, so adding or removing
// one consumer never shifts the draws seen by another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  // Derive an independent substream. Same (seed, name) always yields the
  // same stream.
  Rng stream(std::string_view name) const {
    return Rng(mix(seed_ ^ fnv1a(name)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. Draws two uniforms per call.
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    const __uint128_t wide = static_cast<__uint128_t>(next_u64()) *
                             static_cast<__uint128_t>(n);
    return static_cast<int>(wide >> 64);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char c : s) {
      h ^= static_cast<std::uint8_t>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  // splitmix64 finalizer; decorrelates nearby seeds before feeding mt19937.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dars
