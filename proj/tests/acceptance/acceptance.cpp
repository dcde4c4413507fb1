// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../test_support.hpp"
#include "ruleseeker/blackbox.hpp"
#include "ruleseeker/cli.hpp"
#include "ruleseeker/errors.hpp"
#include "ruleseeker/evaluate.hpp"
#include "ruleseeker/random.hpp"
#include "ruleseeker/solver.hpp"
#include "ruleseeker/transform.hpp"

namespace ruleseeker {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "ruleseeker_acceptance" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(std::vector<std::string> args, std::string* errText = nullptr) {
  args.insert(args.begin(), "ruleseeker");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = runCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (errText) *errText = err.str();
  return code;
}

Instance randomInstance(Rng& rng, std::size_t d) {
  Instance x(d);
  for (std::size_t j = 0; j < d; ++j) x.set(j, rng.bernoulli(0.5));
  return x;
}

FeatureSet randomSubset(Rng& rng, std::size_t d, std::size_t size) {
  std::vector<std::size_t> all(d);
  for (std::size_t j = 0; j < d; ++j) all[j] = j;
  for (std::size_t i = 0; i < size; ++i) std::swap(all[i], all[i + rng.below(d - i)]);
  FeatureSet s(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(s.begin(), s.end());
  return s;
}

Outcome solverExactness() {
  const auto start = Clock::now();
  Rng rng(101);
  const int trials = 1000;
  int mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    SolveInstance inst = testing::randomSolveInstance(rng, 12, 200, 4);
    inst.seed = static_cast<std::uint64_t>(t);
    const auto bb = solveCop(inst);
    const auto ref = enumerateExact(inst);
    if (!bb.optimal || bb.objective != ref.objective) ++mismatches;
  }
  const double secs = secondsSince(start);
  return {mismatches == 0 && secs < 300.0,
          fmt("%d/%d trials equal the enumeration optimum, %.1f s (limit 300 s)", trials - mismatches, trials, secs)};
}

Outcome lossEquivalence() {
  Rng rng(202);
  const int trials = 1000;
  int lossMismatch = 0, roundTripMismatch = 0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t d = 1 + rng.below(80);
    const std::size_t m = 1 + rng.below(60);
    const Instance x = randomInstance(rng, d);
    const int fx = static_cast<int>(rng.below(2));
    const double agree = rng.uniform01();
    std::vector<LabeledSample> samples;
    for (std::size_t i = 0; i < m; ++i) {
      Instance z(d);
      for (std::size_t j = 0; j < d; ++j) z.set(j, rng.bernoulli(agree) ? x[j] : !x[j]);
      samples.push_back({z, static_cast<int>(rng.below(2))});
    }
    Explanation e;
    e.anchor = x;
    e.anchorLabel = fx;
    e.features = randomSubset(rng, d, rng.below(std::min<std::size_t>(d, 6) + 1));
    e.budget = e.features.size();
    const auto ex = toMonomialExamples(x, fx, samples);
    const Rational a = empiricalLossMonomial(MonotoneMonomial(e.features), ex);
    const Rational b = empiricalLossRule(ruleFromExplanation(e), samples);
    if (a.numerator != b.numerator || a.denominator != b.denominator) ++lossMismatch;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(fromMonomialExample(x, fx, ex[i]) == samples[i])) {
        ++roundTripMismatch;
        break;
      }
    }
  }
  return {lossMismatch == 0 && roundTripMismatch == 0,
          fmt("%d triples: %d loss mismatches, %d round-trip mismatches", trials, lossMismatch, roundTripMismatch)};
}

Outcome dominanceAndMonotonicity() {
  Rng rng(303);
  const int trials = 1000;
  int dominance = 0, budget = 0, history = 0;
  auto historyOk = [](const SolveReport& r) {
    for (std::size_t i = 1; i < r.incumbentHistory.size(); ++i) {
      if (r.incumbentHistory[i].seconds < r.incumbentHistory[i - 1].seconds) return false;
      if (r.incumbentHistory[i].objective > r.incumbentHistory[i - 1].objective) return false;
    }
    return true;
  };
  for (int t = 0; t < trials; ++t) {
    SolveInstance inst = testing::randomSolveInstance(rng, 12, 200, 4);
    inst.beamWidth = 1 + rng.below(3);
    const auto cop = solveCop(inst);
    const auto sat = solveSat(inst);
    const auto greedy = solveGreedy(inst);
    if (cop.fullObjective > sat.fullObjective || cop.fullObjective > greedy.fullObjective) ++dominance;
    if (!historyOk(cop) || !historyOk(sat)) ++history;
    std::uint64_t previous = UINT64_MAX;
    for (std::size_t k = 0; k <= std::min<std::size_t>(inst.dim, 5); ++k) {
      SolveInstance byK = inst;
      byK.budget = k;
      const auto r = solveCop(byK);
      if (r.objective > previous) {
        ++budget;
        break;
      }
      previous = r.objective;
    }
  }
  return {dominance + budget + history == 0,
          fmt("%d instances: %d dominance, %d budget-monotonicity, %d incumbent-history violations", trials,
              dominance, budget, history)};
}

double sem(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= n;
  double ss = 0.0;
  for (double a : v) ss += (a - mean) * (a - mean);
  return std::sqrt(ss / (n - 1.0) / n);
}

double meanOf(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a;
  return s / static_cast<double>(v.size());
}

Outcome lossBoundsPrecision() {
  const std::size_t d = 20, anchors = 50, evalSamples = 2000;
  const int repetitions = 20;
  int held = 0;
  double worstMargin = 1e9;
  for (int rep = 0; rep < repetitions; ++rep) {
    const std::uint64_t seed = deriveSeed(404, "loss-bound:" + std::to_string(rep));
    const auto model = makeFixedModel(d, ModelSpec::parse("random-tree:4"), deriveSeed(seed, "model"));
    const OracleHandle h = OracleHandle::builtin(model);
    const Distribution dist = Distribution::uniform(d, deriveSeed(seed, "train"));
    Rng anchorRng(deriveSeed(seed, "anchors"));
    Rng evalRng(deriveSeed(seed, "eval"));
    std::vector<double> precision, loss;
    for (std::size_t a = 0; a < anchors; ++a) {
      const Instance x = dist.sample(anchorRng);
      ExplainOptions options;
      options.budget = 4;
      options.samples = 500;
      options.seed = deriveSeed(seed, "sample:" + std::to_string(a));
      const auto result = explainInstance(h, dist.withSeed(options.seed), x, options);
      const Rule r = ruleFromExplanation(result.explanation);
      precision.push_back(estimatePrecision(h, dist, x, result.explanation.features, evalSamples, evalRng).toDouble());
      loss.push_back(estimateLoss(h, dist, r, evalSamples, evalRng).toDouble());
    }
    const double combined = std::sqrt(sem(precision) * sem(precision) + sem(loss) * sem(loss));
    const double margin = meanOf(loss) + 5.0 * combined - meanOf(precision);
    worstMargin = std::min(worstMargin, margin);
    if (margin >= 0.0) ++held;
  }
  return {held * 100 >= 95 * repetitions,
          fmt("bound held in %d/%d repetitions (need 95%%), smallest slack %.4f", held, repetitions, worstMargin)};
}

Outcome plantedRecovery() {
  const auto start = Clock::now();
  const int runs = 40;
  bool all = true;
  std::string detail;
  for (std::size_t k : {2, 3, 5}) {
    for (std::size_t d : {20, 60}) {
      const std::uint64_t m = pacSampleSize(0.1, 0.05, k, d).m;
      int recovered = 0, exact = 0;
      for (int run = 0; run < runs; ++run) {
        const std::uint64_t seed = deriveSeed(505, fmt("planted:%zu:%zu:%d", k, d, run));
        Rng rng(seed);
        const FeatureSet planted = randomSubset(rng, d, k);
        const OracleHandle h = OracleHandle::builtin(std::make_shared<MonomialModel>(d, planted));
        Instance x = randomInstance(rng, d);
        for (std::size_t j : planted) x.set(j, true);
        ExplainOptions options;
        options.budget = k;
        options.samples = m;
        options.seed = deriveSeed(seed, "sample");
        const Distribution dist = Distribution::uniform(d, options.seed);
        const auto result = explainInstance(h, dist, x, options);
        Rng evalRng(deriveSeed(seed, "eval"));
        const double loss = estimateLoss(h, dist, ruleFromExplanation(result.explanation), 2000, evalRng).toDouble();
        if (result.report.optimal && result.report.objective == 0 && loss <= 0.1) ++recovered;
        if (result.explanation.features == planted) ++exact;
      }
      if (recovered * 100 < 95 * runs) all = false;
      detail += fmt("k=%zu d=%zu m=%llu: %d/%d (exact %d); ", k, d, static_cast<unsigned long long>(m), recovered,
                    runs, exact);
    }
  }
  const double secs = secondsSince(start);
  return {all && secs < 600.0, detail + fmt("%.1f s (limit 600 s)", secs)};
}

Outcome estimatorCalibration() {
  Rng rng(606);
  const int trials = 1000;
  int within = 0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t d = 2 + rng.below(29);
    const std::size_t m = 200 + rng.below(1801);
    const Instance x = randomInstance(rng, d);
    const Conditioning conditioning = rng.bernoulli(0.5) ? Conditioning::kExact : Conditioning::kReject;
    const std::size_t maxSize = conditioning == Conditioning::kReject ? std::min<std::size_t>(d - 1, 3) : d - 1;
    FeatureSet s = randomSubset(rng, d, rng.below(maxSize + 1));
    std::shared_ptr<const Classifier> model;
    Distribution dist = Distribution::uniform(d, rng.next());
    double truth = 0.5;
    switch (t % 3) {
      case 0:
        model = std::make_shared<ParityModel>(d);
        break;
      case 1: {
        if (s.empty()) s = randomSubset(rng, d, 1);
        const std::size_t j = s[rng.below(s.size())];
        model = std::make_shared<DictatorModel>(d, j);
        truth = 0.0;
        break;
      }
      default: {
        const std::size_t j = rng.below(d);
        s.erase(std::remove(s.begin(), s.end(), j), s.end());
        std::vector<double> p(d);
        for (auto& q : p) q = 0.1 + 0.8 * rng.uniform01();
        dist = Distribution::productBernoulli(p, rng.next());
        model = std::make_shared<DictatorModel>(d, j);
        truth = x[j] ? 1.0 - p[j] : p[j];
        break;
      }
    }
    const OracleHandle h = OracleHandle::builtin(model);
    Rng evalRng(rng.next());
    const auto est = estimatePrecision(h, dist, x, s, m, evalRng, conditioning);
    const double se = std::sqrt(truth * (1.0 - truth) / static_cast<double>(est.samplesUsed));
    if (std::fabs(est.toDouble() - truth) <= 4.0 * se) ++within;
  }
  return {within * 100 >= 99 * trials, fmt("%d/%d estimates within 4 standard errors (need 99%%)", within, trials)};
}

Outcome sampleSizeBound() {
  int mismatches = 0, points = 0;
  for (double eps : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    for (double delta : {0.01, 0.05, 0.1, 0.5}) {
      for (auto [k, d] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}, {2, 10}, {5, 60}, {10, 100}, {3, 1000}}) {
        const long double bound =
            (2.0L / (static_cast<long double>(eps) * eps)) *
            (static_cast<long double>(k) * std::log(static_cast<long double>(d)) + std::log(2.0L / delta));
        const auto expected = static_cast<std::uint64_t>(std::ceil(bound));
        if (pacSampleSize(eps, delta, k, d).m != expected) ++mismatches;
        ++points;
      }
    }
  }
  const std::uint64_t example = pacSampleSize(0.1, 0.05, 5, 60).m;
  return {mismatches == 0 && example == 4833,
          fmt("%d/%d grid points match; eps=0.1 delta=0.05 k=5 d=60 gives %llu", points - mismatches, points,
              static_cast<unsigned long long>(example))};
}

const SummaryCell& cell(const EvalReport& report, std::size_t k, std::size_t m, Variant v) {
  for (const auto& c : report.cells) {
    if (c.k == k && c.m == m && c.variant == v) return c;
  }
  throw ContractViolation(fmt("no summary cell for k=%zu m=%zu", k, m));
}

bool notAbove(const SummaryCell& later, const SummaryCell& earlier) {
  return later.mean <= earlier.mean + std::max(later.sem, earlier.sem);
}

Outcome trendReproduction() {
  const auto start = Clock::now();
  const std::vector<std::size_t> ks{1, 3, 5, 7}, ms{50, 200, 800};
  bool all = true;
  std::string detail;
  for (const std::string name : {"iris", "wine"}) {
    const fs::path dir = scratch("trend_" + name);
    std::string err;
    if (cli({"prepare", "--manifest", std::string(RULESEEKER_DATA_DIR) + "/" + name + ".manifest", "--out",
             (dir / "artifact").string()},
            &err) != 0) {
      return {false, "prepare failed for " + name + ": " + err};
    }
    BenchmarkConfig config;
    config.name = name;
    config.dataset = (dir / "artifact").string();
    config.oracle = "builtin:mlp";
    config.ks = ks;
    config.ms = ms;
    config.variants = {Variant::kCop, Variant::kSat};
    config.instances = 25;
    config.evalSamples = 1000;
    config.timeLimit = 60.0;
    config.seed = 7;
    const EvalReport report = runBenchmark(config, (dir / "out").string());
    for (const auto& c : report.cells) {
      std::printf("  %s %s k=%zu m=%zu mean=%.4f sem=%.4f\n", name.c_str(), toString(c.variant).c_str(), c.k, c.m,
                  c.mean, c.sem);
    }
    int violations = 0;
    for (std::size_t i = 1; i < ms.size(); ++i) {
      if (!notAbove(cell(report, 5, ms[i], Variant::kCop), cell(report, 5, ms[i - 1], Variant::kCop))) ++violations;
    }
    for (std::size_t i = 1; i < ks.size(); ++i) {
      if (!notAbove(cell(report, ks[i], 800, Variant::kCop), cell(report, ks[i - 1], 800, Variant::kCop))) ++violations;
    }
    const auto& cop = cell(report, 5, 800, Variant::kCop);
    const auto& sat = cell(report, 5, 800, Variant::kSat);
    const bool copBeatsSat = notAbove(cop, sat);
    if (violations > 0 || !copBeatsSat || report.failedRows > 0) all = false;
    detail += fmt("%s: %d trend violations, cop %.3f vs sat %.3f at k=5 m=800 (%s), %zu failed rows; ", name.c_str(),
                  violations, cop.mean, sat.mean, copBeatsSat ? "ok" : "cop worse", report.failedRows);
  }
  const double secs = secondsSince(start);
  return {all && secs < 1800.0, detail + fmt("%.1f s (limit 1800 s)", secs)};
}

Outcome rerunDeterminism() {
  const fs::path dir = scratch("determinism");
  std::string err;
  if (cli({"prepare", "--manifest", std::string(RULESEEKER_DATA_DIR) + "/wine.manifest", "--out",
           (dir / "artifact").string()},
          &err) != 0) {
    return {false, "prepare failed: " + err};
  }
  const std::string artifact = (dir / "artifact").string();
  for (const char* run : {"explain_a", "explain_b"}) {
    if (cli({"explain", "--dataset", artifact, "--oracle", "builtin:mlp", "--instance", "3", "--k", "4", "--m", "400",
             "--seed", "13", "--out", (dir / run).string()},
            &err) != 0) {
      return {false, "explain failed: " + err};
    }
  }
  std::ofstream(dir / "bench.cfg") << "name = det\ndataset = " << artifact
                                   << "\noracle = builtin:tree:4\nk = 2,4\nm = 100,300\nvariants = cop,sat,greedy\n"
                                      "instances = 4\neval_samples = 300\nseed = 13\n";
  for (const char* run : {"bench_a", "bench_b"}) {
    if (cli({"benchmark", "--config", (dir / "bench.cfg").string(), "--out", (dir / run).string()}, &err) != 0) {
      return {false, "benchmark failed: " + err};
    }
  }
  int differing = 0, compared = 0;
  auto same = [&](const char* a, const char* b, const char* file) {
    ++compared;
    if (slurp(dir / a / file) != slurp(dir / b / file) || slurp(dir / a / file).empty()) ++differing;
  };
  same("explain_a", "explain_b", "explanation.json");
  same("explain_a", "explain_b", "config.txt");
  for (const char* file : {"rows.csv", "summary.csv", "config.txt"}) same("bench_a", "bench_b", file);
  return {differing == 0, fmt("%d/%d output files byte-identical across reruns", compared - differing, compared)};
}

}  // namespace
}  // namespace ruleseeker

int main() {
  using namespace ruleseeker;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"solver exactness", solverExactness},
      {"loss equivalence under the transform", lossEquivalence},
      {"dominance and monotonicity", dominanceAndMonotonicity},
      {"rule loss bounds mean precision error", lossBoundsPrecision},
      {"planted monomial recovery", plantedRecovery},
      {"estimator calibration", estimatorCalibration},
      {"sample size bound", sampleSizeBound},
      {"trend reproduction", trendReproduction},
      {"rerun determinism", rerunDeterminism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
