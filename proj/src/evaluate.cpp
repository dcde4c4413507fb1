#include <algorithm>
#include <cmath>

#include "ruleseeker/errors.hpp"
#include "ruleseeker/evaluate.hpp"

namespace ruleseeker {

Conditioning parseConditioning(const std::string& name) {
  if (name == "exact") return Conditioning::kExact;
  if (name == "reject") return Conditioning::kReject;
  throw ContractViolation("unknown conditioning mode '" + name + "' (exact, reject)");
}

std::string toString(Conditioning c) { return c == Conditioning::kExact ? "exact" : "reject"; }

double binomialStandardError(const Rational& p) {
  if (p.denominator == 0) return 0.0;
  const double v = p.toDouble();
  return std::sqrt(v * (1.0 - v) / static_cast<double>(p.denominator));
}

PrecisionEstimate estimatePrecision(const OracleHandle& h, const Distribution& dist, const Instance& x,
                                    const FeatureSet& s, std::size_t m, Rng& rng, Conditioning conditioning) {
  if (m == 0) throw ContractViolation("precision estimate needs m >= 1");
  if (x.dim() != h.dim() || dist.dim() != h.dim()) {
    throw ContractViolation("anchor, distribution and oracle dimensions differ");
  }
  const int fx = h.predict(x);
  PrecisionEstimate est;
  est.conditioning = conditioning;
  std::vector<int> labels;
  if (conditioning == Conditioning::kExact) {
    for (const auto& smp : sampleConditioned(h, dist, x, s, m, rng)) labels.push_back(smp.label);
    est.draws = m;
  } else {
    const PartialInstance fixed = restrict(x, normalizeFeatures(s, x.dim()));
    std::vector<Instance> kept;
    for (std::size_t i = 0; i < m; ++i) {
      Instance z = dist.sample(rng);
      if (covers(fixed, z)) kept.push_back(std::move(z));
    }
    est.draws = m;
    if (kept.empty()) {
      throw ConditioningInfeasible("no unconditioned draw agrees with the anchor on the explanation", 0);
    }
    labels = h.predict(kept);
  }
  std::uint64_t wrong = 0;
  for (int y : labels) wrong += y != fx;
  est.samplesUsed = labels.size();
  est.value = {wrong, labels.size()};
  est.standardError = binomialStandardError(est.value);
  return est;
}

PrecisionEstimate estimatePrecision(const OracleHandle& h, const Distribution& dist, const Instance& x,
                                    const FeatureSet& s, std::size_t m, Conditioning conditioning) {
  Rng rng(dist.seed());
  return estimatePrecision(h, dist, x, s, m, rng, conditioning);
}

Rational estimateLoss(const OracleHandle& h, const Distribution& dist, const Rule& r, std::size_t m, Rng& rng) {
  if (m == 0) throw ContractViolation("loss estimate needs m >= 1");
  std::uint64_t wrong = 0;
  for (const auto& smp : sampleOracle(h, dist, m, rng)) wrong += r.predict(smp.instance) != smp.label;
  return {wrong, m};
}

Rational estimateLoss(const OracleHandle& h, const Distribution& dist, const Rule& r, std::size_t m) {
  Rng rng(dist.seed());
  return estimateLoss(h, dist, r, m, rng);
}

PacBudget pacSampleSize(double epsilon, double delta, std::size_t k, std::size_t d) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ContractViolation("epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ContractViolation("delta must lie in (0, 1)");
  if (k < 1 || k > d) throw ContractViolation("sample size bound needs 1 <= k <= d");
  PacBudget b{epsilon, delta, k, d, 0.0, 0};
  b.bound = (2.0 / (epsilon * epsilon)) *
            (static_cast<double>(k) * std::log(static_cast<double>(d)) + std::log(2.0 / delta));
  b.m = static_cast<std::uint64_t>(std::ceil(b.bound));
  return b;
}

ExplainResult explainInstance(const OracleHandle& h, const Distribution& dist, const Instance& x,
                              const ExplainOptions& options) {
  if (x.dim() != h.dim() || dist.dim() != h.dim()) {
    throw ContractViolation("anchor, distribution and oracle dimensions differ");
  }
  const std::size_t d = x.dim();
  ExplainResult out;
  out.effectiveBudget = std::min(options.budget, d);
  const int fx = h.predict(x);
  Rng rng(options.seed);
  const auto samples = sampleOracle(h, dist, options.samples, rng);
  const auto examples = toMonomialExamples(x, fx, samples);

  SolveInstance inst = SolveInstance::fromExamples(examples, d, out.effectiveBudget, options.variant);
  inst.timeLimit = options.timeLimit;
  inst.seed = options.seed;
  inst.beamWidth = options.beamWidth;
  inst.cardinality = options.cardinality;
  inst.nodeLimit = options.nodeLimit;
  out.report = solve(inst);

  Explanation& e = out.explanation;
  e.features = out.report.chosen;
  e.budget = options.budget;
  e.anchor = x;
  e.anchorLabel = fx;
  e.objective = out.report.objective;
  e.optimal = out.report.optimal;
  e.solveStats = {out.report.elapsed, out.report.nodesExplored, toString(options.variant)};
  validate(e);
  return out;
}

}  // namespace ruleseeker
