#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "ruleseeker/solver.hpp"

namespace ruleseeker::detail {

using Bits = std::vector<std::uint64_t>;

// Weighted popcount: weights are split into bit planes so a weighted count is
// a handful of masked popcounts.
class WeightPlanes {
 public:
  WeightPlanes() = default;
  explicit WeightPlanes(const std::vector<std::uint64_t>& weights);

  std::size_t words() const { return words_; }
  std::uint64_t total() const { return total_; }

  std::uint64_t weigh(const std::uint64_t* a) const {
    std::uint64_t s = 0;
    for (std::size_t b = 0; b < planes_.size(); ++b) {
      const std::uint64_t* p = planes_[b].data();
      std::uint64_t c = 0;
      for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::uint64_t>(std::popcount(a[w] & p[w]));
      s += c << b;
    }
    return s;
  }
  std::uint64_t weighAnd(const std::uint64_t* a, const std::uint64_t* m) const {
    std::uint64_t s = 0;
    for (std::size_t b = 0; b < planes_.size(); ++b) {
      const std::uint64_t* p = planes_[b].data();
      std::uint64_t c = 0;
      for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::uint64_t>(std::popcount(a[w] & m[w] & p[w]));
      s += c << b;
    }
    return s;
  }
  std::uint64_t weighAndNot(const std::uint64_t* a, const std::uint64_t* m) const {
    std::uint64_t s = 0;
    for (std::size_t b = 0; b < planes_.size(); ++b) {
      const std::uint64_t* p = planes_[b].data();
      std::uint64_t c = 0;
      for (std::size_t w = 0; w < words_; ++w) c += static_cast<std::uint64_t>(std::popcount(a[w] & ~m[w] & p[w]));
      s += c << b;
    }
    return s;
  }

 private:
  std::size_t words_ = 0;
  std::uint64_t total_ = 0;
  std::vector<Bits> planes_;
};

// Per feature j, bitsets of the negatives and positives with u[j] == 0:
// selecting j stops the monomial from firing on exactly those examples.
struct KillTables {
  std::size_t dim = 0;
  std::size_t negWords = 0;
  std::size_t posWords = 0;
  Bits negKill;  // dim x negWords
  Bits posKill;  // dim x posWords
  WeightPlanes negW;
  WeightPlanes posW;

  // withPositives == false drops the positive side (negatives-only objective).
  KillTables(const SolveInstance& inst, bool withPositives);

  const std::uint64_t* neg(std::size_t j) const { return negKill.data() + j * negWords; }
  const std::uint64_t* pos(std::size_t j) const { return posKill.data() + j * posWords; }

  // Objective of s; scratch buffers are resized as needed.
  std::uint64_t cost(const std::size_t* s, std::size_t n, Bits& negScratch, Bits& posScratch) const;
};

// Total order used by every solver: (objective, |S|, lexicographic S).
inline bool canonicalLess(std::uint64_t costA, const FeatureSet& a, std::uint64_t costB, const FeatureSet& b) {
  if (costA != costB) return costA < costB;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::uint64_t binomial(std::size_t n, std::size_t k);  // saturating

}  // namespace ruleseeker::detail
