#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ruleseeker {

// Seeded generator whose derived draws are identical across standard
// libraries (no std::*_distribution, whose algorithms are unspecified).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform01() < p; }

  double normal();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Per-purpose seed: splitmix64(root ^ fnv1a64(purpose)).
std::uint64_t deriveSeed(std::uint64_t root, std::string_view purpose);

inline constexpr std::string_view kSeedScheme = "splitmix64(root ^ fnv1a64(purpose))";

}  // namespace ruleseeker
