#pragma once

// Precision-error and loss estimation, the PAC sample-size bound, the
// end-to-end explanation pipeline and the benchmark harness.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ruleseeker/blackbox.hpp"
#include "ruleseeker/core.hpp"
#include "ruleseeker/kvconfig.hpp"
#include "ruleseeker/random.hpp"
#include "ruleseeker/solver.hpp"
#include "ruleseeker/transform.hpp"

namespace ruleseeker {

// kExact fixes z_S = x_S and draws the rest from D; kReject draws from D and
// keeps only the draws that already agree with x on S.
enum class Conditioning { kExact, kReject };
Conditioning parseConditioning(const std::string& name);
std::string toString(Conditioning c);

// sqrt(p (1 - p) / n); 0 for n == 0.
double binomialStandardError(const Rational& p);

struct PrecisionEstimate {
  Rational value;               // disagreements / samplesUsed
  std::size_t samplesUsed = 0;
  double standardError = 0.0;
  Conditioning conditioning = Conditioning::kExact;
  std::size_t draws = 0;        // draws from D spent (reject mode)

  double toDouble() const { return value.toDouble(); }
};

// f(x) is queried once; reject mode throws ConditioningInfeasible when no
// draw agrees with x on S.
PrecisionEstimate estimatePrecision(const OracleHandle& h, const Distribution& dist, const Instance& x,
                                    const FeatureSet& s, std::size_t m, Rng& rng,
                                    Conditioning conditioning = Conditioning::kExact);
PrecisionEstimate estimatePrecision(const OracleHandle& h, const Distribution& dist, const Instance& x,
                                    const FeatureSet& s, std::size_t m,
                                    Conditioning conditioning = Conditioning::kExact);

// Unconditioned disagreement rate of r with f under D.
Rational estimateLoss(const OracleHandle& h, const Distribution& dist, const Rule& r, std::size_t m, Rng& rng);
Rational estimateLoss(const OracleHandle& h, const Distribution& dist, const Rule& r, std::size_t m);

struct PacBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t k = 0;
  std::size_t d = 0;
  double bound = 0.0;  // (2 / eps^2)(k ln d + ln(2 / delta)) before rounding
  std::uint64_t m = 0;
};

PacBudget pacSampleSize(double epsilon, double delta, std::size_t k, std::size_t d);

struct ExplainOptions {
  std::size_t budget = 3;
  Variant variant = Variant::kCop;
  std::size_t samples = 1000;
  double timeLimit = 60.0;
  std::uint64_t seed = 0;  // training sample stream
  std::size_t beamWidth = 1;
  Cardinality cardinality = Cardinality::kExact;
  std::uint64_t nodeLimit = 0;
};

struct ExplainResult {
  Explanation explanation;
  SolveReport report;
  std::size_t effectiveBudget = 0;  // min(budget, d)
};

// sampleOracle -> toMonomialExamples -> solve. The budget is clamped to d.
ExplainResult explainInstance(const OracleHandle& h, const Distribution& dist, const Instance& x,
                              const ExplainOptions& options);

// Dataset from an artifact directory (written by `prepare`) or a manifest.
BinaryDataset loadBinaryDataset(const std::string& path);

struct OracleContext {
  std::optional<OracleHandle> oracle;
  std::optional<BinaryDataset> dataset;
  double trainAccuracy = -1.0;  // trained builtin models only
  double testAccuracy = -1.0;
  bool constantWarning = false;
};

// Loads `dataset` (may be empty when `oracleSpec` is a fixed model of
// dimension `dim`) and builds the oracle; trained models use the "train"
// seed derived from rootSeed, fixed random models the "model" seed.
OracleContext makeOracleContext(const std::string& dataset, std::size_t dim, const std::string& oracleSpec,
                                std::uint64_t rootSeed);

// Binary view used for the anchor: multi-class builtin models become
// one-vs-rest on the anchor's class. Sets `anchorClass` to that class (or to
// -1 when the oracle is already binary).
OracleHandle anchorView(const OracleHandle& h, const Instance& x, int& anchorClass);

enum class AnchorSource { kTestSplit, kDistribution };
enum class SamplingDistribution { kUniform, kEmpirical };

struct BenchmarkConfig {
  std::string name = "benchmark";
  std::string dataset;  // artifact directory or manifest; empty for synthetic oracles
  std::size_t dim = 0;  // synthetic oracles only
  std::string oracle = "builtin:mlp";
  std::vector<std::size_t> ks = {3};
  std::vector<std::size_t> ms = {1000};
  std::vector<Variant> variants = {Variant::kCop};
  std::size_t instances = 25;
  std::size_t evalSamples = 1000;
  double timeLimit = 60.0;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0: all processors
  Conditioning conditioning = Conditioning::kExact;
  AnchorSource anchors = AnchorSource::kTestSplit;
  SamplingDistribution distribution = SamplingDistribution::kUniform;
  std::size_t beamWidth = 1;
  Cardinality cardinality = Cardinality::kExact;

  // Recognized keys: name dataset dim oracle k m variants instances
  // eval_samples time_limit seed jobs conditioning anchors distribution
  // beam_width cardinality. Unknown keys are a ConfigError.
  static BenchmarkConfig fromKeyValue(const KeyValueConfig& kv);
  KeyValueConfig toKeyValue() const;
  // Settings that change row results (jobs excluded).
  std::string fingerprint() const;
};

struct BenchmarkRow {
  std::size_t anchorIndex = 0;   // position in the anchor list
  std::string instanceId;        // dataset row ("row:17") or drawn anchor ("draw:3")
  std::size_t k = 0;
  std::size_t m = 0;
  Variant variant = Variant::kCop;
  bool ok = false;
  std::string error;
  FeatureSet features;
  int anchorLabel = 0;
  std::uint64_t objective = 0;
  std::uint64_t fullObjective = 0;
  bool optimal = false;
  std::uint64_t nodes = 0;
  std::uint64_t disagreements = 0;
  std::size_t evalSamples = 0;
  double seconds = 0.0;          // solve wall-clock; excluded from primary files

  double precisionError() const {
    return evalSamples == 0 ? 0.0 : static_cast<double>(disagreements) / static_cast<double>(evalSamples);
  }
  std::string key() const;
};

struct SummaryCell {
  std::size_t k = 0;
  std::size_t m = 0;
  Variant variant = Variant::kCop;
  std::size_t rows = 0;
  std::size_t failed = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double sem = 0.0;  // std / sqrt(rows)
  double meanSeconds = 0.0;
};

struct EvalReport {
  std::string name;
  std::vector<BenchmarkRow> rows;  // anchor, k, m, variant order
  std::vector<SummaryCell> cells;  // k, m, variant order
  std::size_t failedRows = 0;
  double trainAccuracy = -1.0;     // builtin trained models only
  double testAccuracy = -1.0;
};

// Aggregates over the successful rows of each (k, m, variant) cell.
std::vector<SummaryCell> summarize(const BenchmarkConfig& config, const std::vector<BenchmarkRow>& rows);

// Runs every (anchor, k, m, variant) row. With an output directory, writes
// config.txt, rows.csv, summary.csv, table.csv, timings.csv, events.jsonl
// and resumes from checkpoint.jsonl.
EvalReport runBenchmark(const BenchmarkConfig& config, const std::optional<std::string>& outDir = std::nullopt);

// "0.14 (±0.20)".
std::string formatMeanStd(double mean, double std);

}  // namespace ruleseeker
