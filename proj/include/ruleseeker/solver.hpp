#pragma once

// Minimum-error monotone k-monomial learning: exact anytime branch-and-bound
// (COP objective), the negatives-only relaxation (SAT objective), a greedy /
// beam baseline, and exhaustive enumeration as the test oracle.
//
// A monomial S "fires" on u iff u[j] == 1 for every j in S. Objectives are
// integer example weights:
//   cop: w{v=0, fires} + w{v=1, does not fire}
//   sat: w{v=0, fires}
// Ties are broken by (objective, |S|, lexicographic S) in every solver.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ruleseeker/core.hpp"
#include "ruleseeker/transform.hpp"

namespace ruleseeker {

enum class Variant { kCop, kSat, kGreedy };
Variant parseVariant(const std::string& name);
std::string toString(Variant v);

// kExact: fires iff all of S agree (sum X_j = K). kLiteral also admits the
// never-firing hypothesis that a literal reading of sum X_j <= K allows.
enum class Cardinality { kExact, kLiteral };
Cardinality parseCardinality(const std::string& name);
std::string toString(Cardinality c);

struct WeightedExample {
  Instance u;
  int v = 0;
  std::uint64_t weight = 1;

  bool operator==(const WeightedExample&) const = default;
};

// Merges identical (u, v) pairs; output sorted by (v, u).
std::vector<WeightedExample> aggregate(std::span<const MonomialExample> examples);

struct SolveInstance {
  std::vector<WeightedExample> examples;
  std::size_t dim = 0;
  std::size_t budget = 0;
  Variant variant = Variant::kCop;
  double timeLimit = 60.0;  // seconds
  std::uint64_t seed = 0;
  std::size_t beamWidth = 1;
  Cardinality cardinality = Cardinality::kExact;
  std::uint64_t enumerationCap = 2'000'000;
  std::uint64_t nodeLimit = 0;  // 0 = unlimited

  static SolveInstance fromExamples(std::span<const MonomialExample> examples, std::size_t dim,
                                    std::size_t budget, Variant variant = Variant::kCop);

  // Throws ContractViolation unless 0 <= budget <= dim, timeLimit > 0 and
  // every example has dimension dim.
  void validate() const;
  std::uint64_t totalWeight() const;
  std::uint64_t negativeWeight() const;
  std::uint64_t positiveWeight() const;
};

struct IncumbentPoint {
  double seconds = 0.0;
  std::uint64_t objective = 0;
};

struct SolveReport {
  FeatureSet chosen;
  std::uint64_t objective = 0;      // under the variant's own objective
  std::uint64_t fullObjective = 0;  // COP objective of `chosen`
  bool optimal = false;
  bool neverFires = false;          // literal-cardinality degenerate solution
  std::uint64_t nodesExplored = 0;
  std::uint64_t subsetsEvaluated = 0;
  double elapsed = 0.0;
  std::vector<IncumbentPoint> incumbentHistory;
  Variant variant = Variant::kCop;
  Cardinality cardinality = Cardinality::kExact;
};

std::uint64_t copObjective(const FeatureSet& s, std::span<const WeightedExample> examples);
std::uint64_t satObjective(const FeatureSet& s, std::span<const WeightedExample> examples);

SolveReport solveCop(const SolveInstance& inst);
SolveReport solveSat(const SolveInstance& inst);
SolveReport solveGreedy(const SolveInstance& inst);
// Dispatches on inst.variant.
SolveReport solve(const SolveInstance& inst);

// Sum over s <= k of C(d, s), saturating at UINT64_MAX.
std::uint64_t subsetCount(std::size_t d, std::size_t k);

// Serial reference: evaluates every |S| <= k directly against the examples
// (COP objective unless variant == kSat). Throws EnumerationRefused above
// inst.enumerationCap subsets.
SolveReport enumerateExact(const SolveInstance& inst);
// OpenMP version over ranked combinations; same result as enumerateExact.
SolveReport enumerateExactParallel(const SolveInstance& inst);

// "d k variant" header, then "weight v bitstring" per weighted example.
void writeInstanceDump(std::ostream& out, const SolveInstance& inst);
SolveInstance readInstanceDump(std::istream& in);

// OPB (pseudo-Boolean) text of the cardinality, channeling and objective rows.
void writeOpbModel(std::ostream& out, const SolveInstance& inst);

}  // namespace ruleseeker
