#pragma once

// Bijection between labeled oracle samples and monotone-monomial training
// examples, and exact empirical losses on both sides.

#include <cstdint>
#include <span>
#include <vector>

#include "ruleseeker/core.hpp"

namespace ruleseeker {

struct MonomialExample {
  Instance u;  // u[j] = 1 iff z[j] == x[j]
  int v = 0;   // 1 iff f(z) == f(x)

  bool operator==(const MonomialExample&) const = default;
};

// Misclassified count over sample count, compared exactly.
struct Rational {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double toDouble() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<unsigned __int128>(a.numerator) * b.denominator ==
           static_cast<unsigned __int128>(b.numerator) * a.denominator;
  }
};

std::vector<MonomialExample> toMonomialExamples(const Instance& x, int fx,
                                                std::span<const LabeledSample> samples);
LabeledSample fromMonomialExample(const Instance& x, int fx, const MonomialExample& e);

Rational empiricalLossRule(const Rule& r, std::span<const LabeledSample> samples);
Rational empiricalLossMonomial(const MonotoneMonomial& c, std::span<const MonomialExample> examples);

}  // namespace ruleseeker
