#include "ruleseeker/transform.hpp"

#include "ruleseeker/errors.hpp"

namespace ruleseeker {
namespace {

void checkLabel(int y) {
  if (y != 0 && y != 1) throw ContractViolation("labels must be 0 or 1");
}

}  // namespace

std::vector<MonomialExample> toMonomialExamples(const Instance& x, int fx, std::span<const LabeledSample> samples) {
  checkLabel(fx);
  std::vector<MonomialExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.instance.dim() != x.dim()) throw ContractViolation("sample dimension differs from the anchor");
    checkLabel(s.label);
    out.push_back({bitwiseEquivalence(s.instance, x), s.label == fx ? 1 : 0});
  }
  return out;
}

LabeledSample fromMonomialExample(const Instance& x, int fx, const MonomialExample& e) {
  if (e.u.dim() != x.dim()) throw ContractViolation("example dimension differs from the anchor");
  checkLabel(fx);
  checkLabel(e.v);
  return {bitwiseEquivalence(e.u, x), e.v == 1 ? fx : 1 - fx};
}

Rational empiricalLossRule(const Rule& r, std::span<const LabeledSample> samples) {
  if (samples.empty()) throw ContractViolation("empirical loss of an empty sample");
  std::uint64_t wrong = 0;
  for (const auto& s : samples) wrong += r.predict(s.instance) != s.label;
  return {wrong, samples.size()};
}

Rational empiricalLossMonomial(const MonotoneMonomial& c, std::span<const MonomialExample> examples) {
  if (examples.empty()) throw ContractViolation("empirical loss of an empty example set");
  std::uint64_t wrong = 0;
  for (const auto& e : examples) wrong += (c.evaluate(e.u) ? 1 : 0) != e.v;
  return {wrong, examples.size()};
}

}  // namespace ruleseeker
