#pragma once

// Opaque classifiers over {0,1}^d: built-in models, the external-process
// oracle, query accounting and the example oracle EX(f, D).

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ruleseeker/core.hpp"
#include "ruleseeker/data.hpp"
#include "ruleseeker/random.hpp"

namespace ruleseeker {

// A trained or hand-built model returning a class index for any input vector.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::size_t dim() const = 0;
  virtual int numClasses() const { return 2; }
  virtual int predictClass(const Instance& z) const = 0;
  virtual std::string describe() const = 0;
};

class ConstantModel final : public Classifier {
 public:
  ConstantModel(std::size_t dim, int label, int numClasses = 2)
      : dim_(dim), label_(label), classes_(numClasses) {}
  std::size_t dim() const override { return dim_; }
  int numClasses() const override { return classes_; }
  int predictClass(const Instance&) const override { return label_; }
  std::string describe() const override;

 private:
  std::size_t dim_;
  int label_;
  int classes_;
};

// f(z) = 1 iff z[j] == 1 for every j in the monomial.
class MonomialModel final : public Classifier {
 public:
  MonomialModel(std::size_t dim, FeatureSet variables);
  std::size_t dim() const override { return dim_; }
  int predictClass(const Instance& z) const override { return monomial_.evaluate(z) ? 1 : 0; }
  std::string describe() const override;

 private:
  std::size_t dim_;
  MonotoneMonomial monomial_;
};

// XOR of the selected coordinates (all coordinates when empty).
class ParityModel final : public Classifier {
 public:
  ParityModel(std::size_t dim, FeatureSet variables = {});
  std::size_t dim() const override { return dim_; }
  int predictClass(const Instance& z) const override;
  std::string describe() const override;

 private:
  std::size_t dim_;
  Instance mask_;
};

class DictatorModel final : public Classifier {
 public:
  DictatorModel(std::size_t dim, std::size_t feature);
  std::size_t dim() const override { return dim_; }
  int predictClass(const Instance& z) const override { return z[feature_] ? 1 : 0; }
  std::string describe() const override;

 private:
  std::size_t dim_;
  std::size_t feature_;
};

// Linear scores per class; binary models hold a single score row.
class LinearModel final : public Classifier {
 public:
  LinearModel(std::size_t dim, std::vector<std::vector<double>> weights, std::vector<double> bias);
  std::size_t dim() const override { return dim_; }
  int numClasses() const override;
  int predictClass(const Instance& z) const override;
  std::string describe() const override;

 private:
  std::size_t dim_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> bias_;
};

// Fully connected ReLU network with a softmax output layer.
class MlpModel final : public Classifier {
 public:
  struct Layer {
    std::size_t in = 0, out = 0;
    std::vector<double> w;  // row-major out x in
    std::vector<double> b;
  };
  MlpModel(std::size_t dim, int numClasses, std::vector<Layer> layers);
  std::size_t dim() const override { return dim_; }
  int numClasses() const override { return classes_; }
  int predictClass(const Instance& z) const override;
  std::string describe() const override;

  // Raw output-layer activations.
  std::vector<double> logits(const Instance& z) const;

 private:
  std::size_t dim_;
  int classes_;
  std::vector<Layer> layers_;
};

// Axis-aligned tree over binary features: internal nodes test z[feature].
class TreeModel final : public Classifier {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    int zero = -1;     // child taken when z[feature] == 0
    int one = -1;
    int label = 0;
  };
  TreeModel(std::size_t dim, int numClasses, std::vector<Node> nodes);
  std::size_t dim() const override { return dim_; }
  int numClasses() const override { return classes_; }
  int predictClass(const Instance& z) const override;
  std::string describe() const override;
  std::size_t depth() const;
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::size_t dim_;
  int classes_;
  std::vector<Node> nodes_;
};

// Complete tree of the given depth with distinct features along each path and
// random binary leaf labels (both labels guaranteed to occur when depth > 0).
std::shared_ptr<TreeModel> makeRandomTree(std::size_t dim, std::size_t depth, Rng& rng);

struct ModelSpec {
  enum class Kind { kLogistic, kMlp, kTree, kConstant, kMonomial, kParity, kDictator, kRandomTree };
  Kind kind = Kind::kLogistic;
  std::vector<std::size_t> hidden = {32};  // mlp
  std::size_t depth = 4;                   // tree / random-tree
  int constant = 1;
  FeatureSet features;                     // monomial / parity
  std::size_t feature = 0;                 // dictator
  std::size_t epochs = 200;                // mlp

  // logistic | mlp[:h1,h2] | tree[:depth] | constant:<0|1> | monomial:<j,..>
  // | parity[:j,..] | dictator:<j> | random-tree[:depth]
  static ModelSpec parse(const std::string& text);
  std::string toString() const;
  bool needsTraining() const;
};

struct TrainResult {
  std::shared_ptr<const Classifier> model;
  double trainAccuracy = 0.0;
  bool constantWarning = false;  // single-class training data
};

// Trains on ds.train (all rows if no split). Deterministic for a fixed seed.
TrainResult trainBuiltin(const BinaryDataset& ds, const ModelSpec& spec, std::uint64_t seed);

// Builds a non-trained model (constant, monomial, parity, dictator, random-tree).
std::shared_ptr<const Classifier> makeFixedModel(std::size_t dim, const ModelSpec& spec,
                                                 std::uint64_t seed);

double accuracy(const Classifier& model, const BinaryDataset& ds, const std::vector<std::size_t>& rows);

// OpenMP batch prediction over a thread-safe classifier, and its serial reference.
std::vector<int> predictBatchParallel(const Classifier& model, std::span<const Instance> batch);
std::vector<int> predictBatchSerial(const Classifier& model, std::span<const Instance> batch);

class ExternalProcess;

enum class OracleKind { kBuiltin, kExternal };

// Binary view of a black box with exact membership-query accounting. Copies
// share the backend and its counter; concurrent predict calls are safe
// (external backends serialize requests).
class OracleHandle {
 public:
  static OracleHandle builtin(std::shared_ptr<const Classifier> model);
  // Spawns `command` through /bin/sh and performs the handshake.
  static OracleHandle external(const std::string& command,
                               std::chrono::milliseconds replyTimeout = std::chrono::seconds(30));

  OracleKind kind() const;
  std::size_t dim() const;
  std::uint64_t queryCount() const;
  std::string describe() const;

  // Labels f(z) in {0,1}; throws ContractViolation on a dimension mismatch.
  std::vector<int> predict(std::span<const Instance> batch) const;
  int predict(const Instance& z) const;

  // Label 1 iff the underlying class equals `targetClass`, 0 otherwise.
  OracleHandle oneVsRest(int targetClass) const;
  std::optional<int> targetClass() const { return target_; }
  // Class index of z under the underlying model (builtin only). Counts one query.
  int predictClass(const Instance& z) const;
  int numClasses() const;

 private:
  struct Backend;
  explicit OracleHandle(std::shared_ptr<Backend> backend) : backend_(std::move(backend)) {}

  std::shared_ptr<Backend> backend_;
  std::optional<int> target_;
};

class Distribution {
 public:
  enum class Kind { kUniform, kProductBernoulli, kEmpirical, kHammingBall };

  static Distribution uniform(std::size_t dim, std::uint64_t seed = 0);
  static Distribution productBernoulli(std::vector<double> p, std::uint64_t seed = 0);
  static Distribution empirical(std::vector<Instance> rows, std::uint64_t seed = 0);
  static Distribution hammingBall(Instance center, std::size_t radius, std::uint64_t seed = 0);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  Distribution withSeed(std::uint64_t seed) const;
  bool isProductForm() const { return kind_ == Kind::kUniform || kind_ == Kind::kProductBernoulli; }
  std::string describe() const;

  Instance sample(Rng& rng) const;
  // Draw with z_S = x_S. Empirical: rejection over rows, each draw spending
  // one unit of attemptBudget (ConditioningInfeasible on exhaustion).
  Instance sampleConditioned(Rng& rng, const PartialInstance& fixed, std::size_t& attemptBudget) const;

  const std::vector<double>& probabilities() const { return p_; }

 private:
  Kind kind_ = Kind::kUniform;
  std::size_t dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> p_;
  std::shared_ptr<const std::vector<Instance>> rows_;
  Instance center_;
  std::size_t radius_ = 0;
};

// m i.i.d. draws from dist (stream seeded from dist.seed()), labeled in one batch.
std::vector<LabeledSample> sampleOracle(const OracleHandle& h, const Distribution& dist, std::size_t m);
std::vector<LabeledSample> sampleOracle(const OracleHandle& h, const Distribution& dist, std::size_t m,
                                        Rng& rng);

inline constexpr std::size_t kRejectionRetryFactor = 1000;

std::vector<LabeledSample> sampleConditioned(const OracleHandle& h, const Distribution& dist,
                                             const Instance& x, const FeatureSet& features,
                                             std::size_t m);
std::vector<LabeledSample> sampleConditioned(const OracleHandle& h, const Distribution& dist,
                                             const Instance& x, const FeatureSet& features,
                                             std::size_t m, Rng& rng);

// "builtin:<model spec>" or "exec:<command line>".
struct OracleSpec {
  enum class Kind { kBuiltin, kExec };
  Kind kind = Kind::kBuiltin;
  ModelSpec model;
  std::string command;

  static OracleSpec parse(const std::string& text);
  std::string toString() const;
};

struct ConformanceStep {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Wire-protocol v1 script against `command`: handshake, three predict batches
// (the last with 1000 rows), replay, malformed-request recovery, bye.
std::vector<ConformanceStep> runConformance(const std::string& command,
                                            std::chrono::milliseconds replyTimeout = std::chrono::seconds(30));

}  // namespace ruleseeker
