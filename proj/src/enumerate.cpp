#include <omp.h>

#include <algorithm>
#include <chrono>

#include "kill_tables.hpp"
#include "ruleseeker/errors.hpp"
#include "ruleseeker/solver.hpp"

namespace ruleseeker {
namespace {

using Clock = std::chrono::steady_clock;

void checkCap(const SolveInstance& inst) {
  inst.validate();
  const std::uint64_t n = subsetCount(inst.dim, inst.budget);
  if (n > inst.enumerationCap) {
    throw EnumerationRefused("enumeration of " + std::to_string(n) + " subsets exceeds the cap of " +
                             std::to_string(inst.enumerationCap));
  }
}

// Advances a sorted combination over 0..d-1 in lexicographic order.
bool nextCombination(std::vector<std::size_t>& c, std::size_t d) {
  const std::size_t s = c.size();
  for (std::size_t i = s; i-- > 0;) {
    if (c[i] < d - s + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < s; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Lexicographic combination of size s with the given rank.
std::vector<std::size_t> unrankCombination(std::size_t d, std::size_t s, std::uint64_t rank) {
  std::vector<std::size_t> c;
  c.reserve(s);
  std::size_t next = 0;
  for (std::size_t i = 0; i < s; ++i) {
    for (;; ++next) {
      const std::uint64_t count = detail::binomial(d - 1 - next, s - 1 - i);
      if (rank < count) break;
      rank -= count;
    }
    c.push_back(next++);
  }
  return c;
}

SolveReport finish(const SolveInstance& inst, FeatureSet best, std::uint64_t cost, std::uint64_t evaluated,
                   Clock::time_point t0) {
  SolveReport rep;
  rep.variant = inst.variant == Variant::kSat ? Variant::kSat : Variant::kCop;
  rep.cardinality = Cardinality::kExact;
  rep.chosen = std::move(best);
  rep.objective = cost;
  rep.fullObjective = copObjective(rep.chosen, inst.examples);
  rep.optimal = true;
  rep.subsetsEvaluated = evaluated;
  rep.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  rep.incumbentHistory.push_back({rep.elapsed, cost});
  return rep;
}

}  // namespace

SolveReport enumerateExact(const SolveInstance& inst) {
  checkCap(inst);
  const auto t0 = Clock::now();
  const bool sat = inst.variant == Variant::kSat;
  FeatureSet best;
  std::uint64_t bestCost = UINT64_MAX;
  std::uint64_t evaluated = 0;
  for (std::size_t s = 0; s <= inst.budget; ++s) {
    std::vector<std::size_t> c(s);
    for (std::size_t i = 0; i < s; ++i) c[i] = i;
    do {
      const std::uint64_t cost = sat ? satObjective(c, inst.examples) : copObjective(c, inst.examples);
      ++evaluated;
      if (cost < bestCost) {
        bestCost = cost;
        best = c;
      }
    } while (s > 0 && nextCombination(c, inst.dim));
  }
  return finish(inst, std::move(best), bestCost, evaluated, t0);
}

SolveReport enumerateExactParallel(const SolveInstance& inst) {
  checkCap(inst);
  const auto t0 = Clock::now();
  const detail::KillTables t(inst, inst.variant != Variant::kSat);

  struct Best {
    std::uint64_t cost = UINT64_MAX;
    std::size_t size = 0;
    std::uint64_t rank = 0;
  };
  auto better = [](const Best& a, const Best& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.size != b.size) return a.size < b.size;
    return a.rank < b.rank;
  };
  Best global;
  std::uint64_t evaluated = 0;

  for (std::size_t s = 0; s <= inst.budget; ++s) {
    const std::uint64_t total = detail::binomial(inst.dim, s);
    Best level;
#pragma omp parallel
    {
      const auto nt = static_cast<std::uint64_t>(omp_get_num_threads());
      const auto id = static_cast<std::uint64_t>(omp_get_thread_num());
      const std::uint64_t lo = total * id / nt;
      const std::uint64_t hi = total * (id + 1) / nt;
      Best local;
      if (lo < hi) {
        std::vector<std::size_t> c = unrankCombination(inst.dim, s, lo);
        detail::Bits negScratch, posScratch;
        for (std::uint64_t r = lo; r < hi; ++r) {
          const std::uint64_t cost = t.cost(c.data(), c.size(), negScratch, posScratch);
          const Best here{cost, s, r};
          if (better(here, local)) local = here;
          if (r + 1 < hi) nextCombination(c, inst.dim);
        }
      }
#pragma omp critical
      {
        if (better(local, level)) level = local;
      }
    }
    evaluated += total;
    if (better(level, global)) global = level;
  }
  return finish(inst, unrankCombination(inst.dim, global.size, global.rank), global.cost, evaluated, t0);
}

}  // namespace ruleseeker
