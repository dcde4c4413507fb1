#include "ruleseeker/random.hpp"

#include <cmath>
#include <numbers>

namespace ruleseeker {

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection on the top of the range keeps draws exactly uniform.
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t r = next();
  while (r >= limit) r = next();
  return r % bound;
}

double Rng::normal() {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t deriveSeed(std::uint64_t root, std::string_view purpose) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : purpose) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(root ^ h);
}

}  // namespace ruleseeker
