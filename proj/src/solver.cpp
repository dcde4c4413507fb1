#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <queue>

#include "kill_tables.hpp"
#include "ruleseeker/errors.hpp"
#include "ruleseeker/solver.hpp"

namespace ruleseeker {
namespace detail {

WeightPlanes::WeightPlanes(const std::vector<std::uint64_t>& weights)
    : words_(Instance::wordCount(weights.size())) {
  std::uint64_t maxW = 0;
  for (auto w : weights) {
    maxW = std::max(maxW, w);
    total_ += w;
  }
  const int nPlanes = std::bit_width(maxW);
  planes_.assign(static_cast<std::size_t>(nPlanes), Bits(words_, 0));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (int b = 0; b < nPlanes; ++b) {
      if ((weights[i] >> b) & 1u) planes_[static_cast<std::size_t>(b)][i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
}

KillTables::KillTables(const SolveInstance& inst, bool withPositives) : dim(inst.dim) {
  std::vector<const WeightedExample*> negs, poss;
  for (const auto& e : inst.examples) {
    if (e.v == 0) {
      negs.push_back(&e);
    } else if (withPositives) {
      poss.push_back(&e);
    }
  }
  negWords = Instance::wordCount(negs.size());
  posWords = Instance::wordCount(poss.size());
  negKill.assign(dim * negWords, 0);
  posKill.assign(dim * posWords, 0);
  std::vector<std::uint64_t> nw, pw;
  for (std::size_t i = 0; i < negs.size(); ++i) {
    nw.push_back(negs[i]->weight);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!negs[i]->u[j]) negKill[j * negWords + i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
  for (std::size_t i = 0; i < poss.size(); ++i) {
    pw.push_back(poss[i]->weight);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!poss[i]->u[j]) posKill[j * posWords + i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
  negW = WeightPlanes(nw);
  posW = WeightPlanes(pw);
}

std::uint64_t KillTables::cost(const std::size_t* s, std::size_t n, Bits& negScratch, Bits& posScratch) const {
  negScratch.assign(negWords, 0);
  posScratch.assign(posWords, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const std::uint64_t* a = neg(s[t]);
    for (std::size_t w = 0; w < negWords; ++w) negScratch[w] |= a[w];
    const std::uint64_t* b = pos(s[t]);
    for (std::size_t w = 0; w < posWords; ++w) posScratch[w] |= b[w];
  }
  return negW.total() - negW.weigh(negScratch.data()) + posW.weigh(posScratch.data());
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(r);
}

}  // namespace detail

using detail::Bits;
using detail::KillTables;

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Incumbent {
  std::uint64_t cost = UINT64_MAX;
  FeatureSet set;
  bool valid = false;
};

// Beam search over the kill tables. Width 1 is plain greedy: add the feature
// with the best marginal decrease until the budget is spent or nothing improves.
Incumbent beamSearch(const KillTables& t, std::size_t budget, std::size_t width, std::uint64_t& evaluated) {
  struct State {
    FeatureSet s;
    Bits alive;  // negatives still fired
    Bits hit;    // positives no longer fired
    std::uint64_t cost = 0;
  };
  State root;
  root.alive.assign(t.negWords, ~std::uint64_t{0});
  root.hit.assign(t.posWords, 0);
  root.cost = t.negW.total();
  Incumbent best{root.cost, {}, true};
  ++evaluated;

  std::vector<State> beam{root};
  width = std::max<std::size_t>(width, 1);
  for (std::size_t step = 0; step < budget; ++step) {
    std::map<FeatureSet, State> expanded;
    for (const auto& st : beam) {
      for (std::size_t j = 0; j < t.dim; ++j) {
        if (std::binary_search(st.s.begin(), st.s.end(), j)) continue;
        FeatureSet ns = st.s;
        ns.insert(std::upper_bound(ns.begin(), ns.end(), j), j);
        if (expanded.count(ns)) continue;
        State next;
        next.s = ns;
        next.alive = st.alive;
        const std::uint64_t* nk = t.neg(j);
        for (std::size_t w = 0; w < t.negWords; ++w) next.alive[w] &= ~nk[w];
        next.hit = st.hit;
        const std::uint64_t* pk = t.pos(j);
        for (std::size_t w = 0; w < t.posWords; ++w) next.hit[w] |= pk[w];
        next.cost = t.negW.weigh(next.alive.data()) + t.posW.weigh(next.hit.data());
        ++evaluated;
        expanded.emplace(std::move(ns), std::move(next));
      }
    }
    std::vector<State> pool;
    pool.reserve(expanded.size());
    for (auto& [k, v] : expanded) pool.push_back(std::move(v));
    std::sort(pool.begin(), pool.end(), [](const State& a, const State& b) {
      return detail::canonicalLess(a.cost, a.s, b.cost, b.s);
    });
    if (pool.size() > width) pool.resize(width);
    bool improved = false;
    for (const auto& st : pool) {
      if (detail::canonicalLess(st.cost, st.s, best.cost, best.set)) {
        best = {st.cost, st.s, true};
        improved = true;
      }
    }
    if (!improved || pool.empty()) break;
    beam = std::move(pool);
  }
  return best;
}

class BranchAndBound {
 public:
  BranchAndBound(const SolveInstance& inst, bool withPositives)
      : inst_(inst), t_(inst, withPositives), start_(Clock::now()) {
    deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(inst.timeLimit));
  }

  void run(SolveReport& rep) {
    std::uint64_t evaluated = 0;
    const Incumbent seed = beamSearch(t_, inst_.budget, 1, evaluated);
    offer(seed.set, seed.cost);

    Node root;
    root.alive.assign(t_.negWords, ~std::uint64_t{0});
    if (const std::size_t tail = negCount() % 64; tail != 0) root.alive.back() = (std::uint64_t{1} << tail) - 1;
    root.hit.assign(t_.posWords, 0);
    root.posCost = 0;
    root.aliveW = t_.negW.total();
    std::vector<std::uint32_t> cands = rootCandidates();
    dfs(root, std::move(cands), inst_.budget);

    rep.chosen = best_.set;
    rep.objective = best_.cost;
    rep.optimal = !aborted_;
    rep.nodesExplored = nodes_;
    rep.subsetsEvaluated = evaluated + offers_;
    rep.incumbentHistory = std::move(history_);
  }

 private:
  struct Node {
    Bits alive;
    Bits hit;
    std::uint64_t posCost = 0;
    std::uint64_t aliveW = 0;
    FeatureSet included;  // insertion order
  };
  struct Cand {
    std::uint32_t feature;
    std::uint64_t kill;
    std::uint64_t pen;
  };

  std::size_t negCount() const {
    std::size_t n = 0;
    for (const auto& e : inst_.examples) n += e.v == 0;
    return n;
  }

  // Drops features that never kill a negative and features dominated by a
  // lower-index feature (kills a superset of negatives, a subset of positives).
  std::vector<std::uint32_t> rootCandidates() const {
    std::vector<std::uint32_t> out;
    auto subset = [](const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
      for (std::size_t w = 0; w < n; ++w) {
        if (a[w] & ~b[w]) return false;
      }
      return true;
    };
    for (std::size_t j = 0; j < t_.dim; ++j) {
      bool useful = false;
      for (std::size_t w = 0; w < t_.negWords; ++w) useful |= t_.neg(j)[w] != 0;
      if (!useful) continue;
      bool dominated = false;
      for (std::size_t i = 0; i < j && !dominated; ++i) {
        dominated = subset(t_.neg(j), t_.neg(i), t_.negWords) && subset(t_.pos(i), t_.pos(j), t_.posWords);
      }
      if (!dominated) out.push_back(static_cast<std::uint32_t>(j));
    }
    return out;
  }

  void offer(const FeatureSet& included, std::uint64_t cost) {
    ++offers_;
    if (cost > best_.cost) return;
    FeatureSet s = included;
    std::sort(s.begin(), s.end());
    if (best_.valid && !detail::canonicalLess(cost, s, best_.cost, best_.set)) return;
    const bool costImproved = !best_.valid || cost < best_.cost;
    best_ = {cost, std::move(s), true};
    if (costImproved) history_.push_back({secondsSince(start_), cost});
  }

  bool outOfTime() {
    if (aborted_) return true;
    if (inst_.nodeLimit != 0 && nodes_ >= inst_.nodeLimit) aborted_ = true;
    if ((nodes_ & 63u) == 0 && Clock::now() >= deadline_) aborted_ = true;
    return aborted_;
  }

  // Admissible bound on the cost of any extension by at most r candidates.
  // For a penalty threshold tau, sets whose members all cost <= tau in
  // positives kill at most min(top-r kill sum, union kill) of the alive
  // negatives; sets with a member above tau pay more than tau.
  std::uint64_t bound(std::vector<Cand>& cs, std::size_t r, const Node& node) {
    std::sort(cs.begin(), cs.end(), [](const Cand& a, const Cand& b) { return a.pen < b.pen; });
    std::uint64_t best = node.aliveW;
    std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> top;
    std::uint64_t topSum = 0;
    unionBits_.assign(t_.negWords, 0);
    std::size_t i = 0;
    while (i < cs.size()) {
      const std::uint64_t tau = cs[i].pen;
      if (tau >= best) break;
      for (; i < cs.size() && cs[i].pen == tau; ++i) {
        top.push(cs[i].kill);
        topSum += cs[i].kill;
        if (top.size() > r) {
          topSum -= top.top();
          top.pop();
        }
        const std::uint64_t* k = t_.neg(cs[i].feature);
        for (std::size_t w = 0; w < t_.negWords; ++w) unionBits_[w] |= k[w];
      }
      const std::uint64_t unionW = t_.negW.weighAnd(unionBits_.data(), node.alive.data());
      const std::uint64_t killable = std::min(topSum, unionW);
      best = std::min(best, tau + node.aliveW - killable);
    }
    return node.posCost + best;
  }

  void dfs(const Node& node, std::vector<std::uint32_t> cands, std::size_t r) {
    ++nodes_;
    if (outOfTime()) return;
    offer(node.included, node.posCost + node.aliveW);
    std::vector<Cand> cs;
    while (r > 0) {
      cs.clear();
      for (auto f : cands) {
        const std::uint64_t kill = t_.negW.weighAnd(t_.neg(f), node.alive.data());
        if (kill == 0) continue;
        cs.push_back({f, kill, t_.posW.weighAndNot(t_.pos(f), node.hit.data())});
      }
      if (cs.empty()) return;
      cands.clear();
      for (const auto& c : cs) cands.push_back(c.feature);

      const std::uint64_t lb = bound(cs, r, node);
      if (lb > best_.cost) return;
      std::size_t rr = r;
      if (lb == best_.cost) {
        if (node.included.size() >= best_.set.size()) return;
        rr = std::min(r, best_.set.size() - node.included.size());
      }

      const Cand pick = *std::min_element(cs.begin(), cs.end(), [](const Cand& a, const Cand& b) {
        const auto ga = static_cast<__int128>(a.kill) - static_cast<__int128>(a.pen);
        const auto gb = static_cast<__int128>(b.kill) - static_cast<__int128>(b.pen);
        if (ga != gb) return ga > gb;
        if (a.kill != b.kill) return a.kill > b.kill;
        return a.feature < b.feature;
      });
      cands.erase(std::find(cands.begin(), cands.end(), pick.feature));

      Node child;
      child.alive = node.alive;
      const std::uint64_t* nk = t_.neg(pick.feature);
      for (std::size_t w = 0; w < t_.negWords; ++w) child.alive[w] &= ~nk[w];
      child.hit = node.hit;
      const std::uint64_t* pk = t_.pos(pick.feature);
      for (std::size_t w = 0; w < t_.posWords; ++w) child.hit[w] |= pk[w];
      child.aliveW = node.aliveW - pick.kill;
      child.posCost = node.posCost + pick.pen;
      child.included = node.included;
      child.included.push_back(pick.feature);
      dfs(child, cands, rr - 1);

      ++nodes_;
      if (outOfTime()) return;
    }
  }

  const SolveInstance& inst_;
  KillTables t_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  Incumbent best_;
  std::vector<IncumbentPoint> history_;
  Bits unionBits_;
  std::uint64_t nodes_ = 0;
  std::uint64_t offers_ = 0;
  bool aborted_ = false;
};

void applyLiteralCardinality(const SolveInstance& inst, SolveReport& rep) {
  if (inst.cardinality != Cardinality::kLiteral || inst.dim == 0) return;
  const std::uint64_t neverCost = rep.variant == Variant::kSat ? 0 : inst.positiveWeight();
  if (neverCost < rep.objective) {
    rep.chosen.clear();
    rep.objective = neverCost;
    rep.fullObjective = inst.positiveWeight();
    rep.neverFires = true;
  }
}

SolveReport runExact(const SolveInstance& inst, Variant variant) {
  inst.validate();
  const auto t0 = Clock::now();
  SolveReport rep;
  rep.variant = variant;
  rep.cardinality = inst.cardinality;
  BranchAndBound bb(inst, variant == Variant::kCop);
  bb.run(rep);
  rep.fullObjective = copObjective(rep.chosen, inst.examples);
  applyLiteralCardinality(inst, rep);
  rep.elapsed = secondsSince(t0);
  return rep;
}

}  // namespace

Variant parseVariant(const std::string& name) {
  if (name == "cop") return Variant::kCop;
  if (name == "sat") return Variant::kSat;
  if (name == "greedy") return Variant::kGreedy;
  throw ContractViolation("unknown solver variant '" + name + "' (cop, sat, greedy)");
}

std::string toString(Variant v) {
  switch (v) {
    case Variant::kCop:
      return "cop";
    case Variant::kSat:
      return "sat";
    case Variant::kGreedy:
      return "greedy";
  }
  return "?";
}

Cardinality parseCardinality(const std::string& name) {
  if (name == "exact") return Cardinality::kExact;
  if (name == "literal") return Cardinality::kLiteral;
  throw ContractViolation("unknown cardinality semantics '" + name + "' (exact, literal)");
}

std::string toString(Cardinality c) { return c == Cardinality::kExact ? "exact" : "literal"; }

std::vector<WeightedExample> aggregate(std::span<const MonomialExample> examples) {
  std::map<std::pair<int, Instance>, std::uint64_t> counts;
  for (const auto& e : examples) {
    if (e.v != 0 && e.v != 1) throw ContractViolation("monomial example labels must be 0 or 1");
    ++counts[{e.v, e.u}];
  }
  std::vector<WeightedExample> out;
  out.reserve(counts.size());
  for (const auto& [key, w] : counts) out.push_back({key.second, key.first, w});
  return out;
}

SolveInstance SolveInstance::fromExamples(std::span<const MonomialExample> examples, std::size_t dim,
                                          std::size_t budget, Variant variant) {
  SolveInstance inst;
  inst.examples = aggregate(examples);
  inst.dim = dim;
  inst.budget = budget;
  inst.variant = variant;
  return inst;
}

void SolveInstance::validate() const {
  if (budget > dim) {
    throw ContractViolation("budget k = " + std::to_string(budget) + " exceeds dimension d = " + std::to_string(dim));
  }
  if (!(timeLimit > 0.0)) throw ContractViolation("time limit must be positive");
  for (const auto& e : examples) {
    if (e.u.dim() != dim) throw ContractViolation("example dimension differs from the instance dimension");
    if (e.v != 0 && e.v != 1) throw ContractViolation("example labels must be 0 or 1");
  }
}

std::uint64_t SolveInstance::totalWeight() const { return negativeWeight() + positiveWeight(); }

std::uint64_t SolveInstance::negativeWeight() const {
  std::uint64_t s = 0;
  for (const auto& e : examples) s += e.v == 0 ? e.weight : 0;
  return s;
}

std::uint64_t SolveInstance::positiveWeight() const {
  std::uint64_t s = 0;
  for (const auto& e : examples) s += e.v == 1 ? e.weight : 0;
  return s;
}

std::uint64_t copObjective(const FeatureSet& s, std::span<const WeightedExample> examples) {
  const MonotoneMonomial c(s);
  std::uint64_t cost = 0;
  for (const auto& e : examples) {
    if (c.evaluate(e.u) != (e.v == 1)) cost += e.weight;
  }
  return cost;
}

std::uint64_t satObjective(const FeatureSet& s, std::span<const WeightedExample> examples) {
  const MonotoneMonomial c(s);
  std::uint64_t cost = 0;
  for (const auto& e : examples) {
    if (e.v == 0 && c.evaluate(e.u)) cost += e.weight;
  }
  return cost;
}

SolveReport solveCop(const SolveInstance& inst) { return runExact(inst, Variant::kCop); }

SolveReport solveSat(const SolveInstance& inst) { return runExact(inst, Variant::kSat); }

SolveReport solveGreedy(const SolveInstance& inst) {
  inst.validate();
  const auto t0 = Clock::now();
  SolveReport rep;
  rep.variant = Variant::kGreedy;
  rep.cardinality = Cardinality::kExact;
  const KillTables t(inst, true);
  const Incumbent best = beamSearch(t, inst.budget, inst.beamWidth, rep.subsetsEvaluated);
  rep.chosen = best.set;
  rep.objective = best.cost;
  rep.fullObjective = best.cost;
  rep.optimal = false;
  rep.elapsed = secondsSince(t0);
  rep.incumbentHistory.push_back({rep.elapsed, rep.objective});
  return rep;
}

SolveReport solve(const SolveInstance& inst) {
  switch (inst.variant) {
    case Variant::kCop:
      return solveCop(inst);
    case Variant::kSat:
      return solveSat(inst);
    case Variant::kGreedy:
      return solveGreedy(inst);
  }
  throw ContractViolation("unknown solver variant");
}

std::uint64_t subsetCount(std::size_t d, std::size_t k) {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s <= std::min(k, d); ++s) {
    const std::uint64_t c = detail::binomial(d, s);
    if (c > UINT64_MAX - total) return UINT64_MAX;
    total += c;
  }
  return total;
}

}  // namespace ruleseeker
