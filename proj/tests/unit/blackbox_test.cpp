#include <gtest/gtest.h>

#include <cmath>

#include "ruleseeker/blackbox.hpp"
#include "ruleseeker/errors.hpp"

namespace ruleseeker {
namespace {

BinaryDataset table(const std::vector<std::string>& rows, const std::vector<int>& labels) {
  BinaryDataset ds;
  ds.dim = rows.front().size();
  for (const auto& r : rows) ds.instances.push_back(Instance::fromString(r));
  ds.labels = labels;
  ds.classNames = {"0", "1"};
  return ds;
}

double bestLinearAccuracy(const BinaryDataset& ds) {
  double best = 0.0;
  for (int a = -8; a <= 8; ++a) {
    for (int b = -8; b <= 8; ++b) {
      for (int c = -8; c <= 8; ++c) {
        int ok = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) {
          const double s = 0.5 * a * ds.instances[i][0] + 0.5 * b * ds.instances[i][1] + 0.5 * c + 0.01;
          ok += (s > 0 ? 1 : 0) == ds.labels[i];
        }
        best = std::max(best, static_cast<double>(ok) / static_cast<double>(ds.size()));
      }
    }
  }
  return best;
}

std::vector<Instance> batchOf(std::initializer_list<const char*> bits) {
  std::vector<Instance> out;
  for (const char* b : bits) out.push_back(Instance::fromString(b));
  return out;
}

TEST(Predict, BuiltinExamples) {
  auto one = OracleHandle::builtin(std::make_shared<ConstantModel>(3, 1));
  EXPECT_EQ(one.predict(batchOf({"000", "101", "111"})), (std::vector<int>{1, 1, 1}));
  auto mono = OracleHandle::builtin(std::make_shared<MonomialModel>(3, FeatureSet{0, 2}));
  EXPECT_EQ(mono.predict(Instance::fromString("101")), 1);
  EXPECT_EQ(mono.predict(Instance::fromString("011")), 0);
  EXPECT_EQ(mono.kind(), OracleKind::kBuiltin);
}

TEST(Predict, QueryCountIsExact) {
  auto h = OracleHandle::builtin(std::make_shared<ParityModel>(4));
  h.predict(batchOf({"0000", "1111"}));
  h.predict(Instance::fromString("1000"));
  auto copy = h;
  copy.predict(batchOf({"0001", "0011", "0111"}));
  EXPECT_EQ(h.queryCount(), 6u);
  EXPECT_THROW(h.predict(Instance::fromString("000")), ContractViolation);
  EXPECT_EQ(h.queryCount(), 6u);
}

TEST(Predict, AcceptsNonOneHotVectors) {
  auto h = OracleHandle::builtin(std::make_shared<DictatorModel>(5, 4));
  EXPECT_EQ(h.predict(Instance::ones(5)), 1);
  EXPECT_EQ(h.predict(Instance(5)), 0);
}

TEST(Predict, MultiClassNeedsOneVsRest) {
  std::vector<TreeModel::Node> nodes{{0, 1, 2, 0}, {-1, -1, -1, 2}, {-1, -1, -1, 1}};
  auto h = OracleHandle::builtin(std::make_shared<TreeModel>(2, 3, nodes));
  EXPECT_EQ(h.numClasses(), 3);
  EXPECT_THROW(h.predict(Instance::fromString("00")), ContractViolation);
  auto bin = h.oneVsRest(2);
  EXPECT_EQ(bin.predict(Instance::fromString("00")), 1);
  EXPECT_EQ(bin.predict(Instance::fromString("10")), 0);
  EXPECT_EQ(h.predictClass(Instance::fromString("10")), 1);
  EXPECT_THROW(h.oneVsRest(3), ContractViolation);
}

TEST(Predict, ParallelBatchMatchesSerial) {
  Rng rng(5);
  auto tree = makeRandomTree(30, 6, rng);
  auto dist = Distribution::uniform(30, 5);
  std::vector<Instance> batch;
  for (int i = 0; i < 3000; ++i) batch.push_back(dist.sample(rng));
  EXPECT_EQ(predictBatchParallel(*tree, batch), predictBatchSerial(*tree, batch));
}

TEST(Train, LogisticSeparable) {
  const auto ds = table({"00", "01", "10", "11"}, {0, 0, 1, 1});
  const auto r = trainBuiltin(ds, ModelSpec::parse("logistic"), 1);
  EXPECT_DOUBLE_EQ(r.trainAccuracy, accuracy(*r.model, ds, ds.trainOrAll()));
  EXPECT_DOUBLE_EQ(r.trainAccuracy, 1.0);
  EXPECT_FALSE(r.constantWarning);
}

TEST(Train, XorStaysWithinBestLinearAccuracy) {
  const auto ds = table({"00", "01", "10", "11"}, {0, 1, 1, 0});
  const double bound = bestLinearAccuracy(ds);
  EXPECT_DOUBLE_EQ(bound, 0.75);
  const auto r = trainBuiltin(ds, ModelSpec::parse("logistic"), 1);
  EXPECT_LE(r.trainAccuracy, bound);
}

TEST(Train, SingleClassGivesConstantWithWarning) {
  const auto ds = table({"00", "01", "11"}, {1, 1, 1});
  for (const char* spec : {"logistic", "mlp", "tree"}) {
    const auto r = trainBuiltin(ds, ModelSpec::parse(spec), 1);
    EXPECT_TRUE(r.constantWarning) << spec;
    for (const char* z : {"00", "10", "11"}) EXPECT_EQ(r.model->predictClass(Instance::fromString(z)), 1);
  }
}

TEST(Train, DeterministicForSeed) {
  Rng rng(8);
  BinaryDataset ds;
  ds.dim = 10;
  ds.classNames = {"a", "b", "c"};
  for (int i = 0; i < 120; ++i) {
    Instance z(10);
    for (std::size_t j = 0; j < 10; ++j) z.set(j, rng.bernoulli(0.4));
    ds.labels.push_back(z[0] ? 2 : (z[3] ? 1 : 0));
    ds.instances.push_back(z);
  }
  for (const char* spec : {"mlp:8", "tree:3", "logistic"}) {
    const auto a = trainBuiltin(ds, ModelSpec::parse(spec), 3);
    const auto b = trainBuiltin(ds, ModelSpec::parse(spec), 3);
    EXPECT_GE(a.trainAccuracy, 0.9) << spec;
    for (const auto& z : ds.instances) ASSERT_EQ(a.model->predictClass(z), b.model->predictClass(z)) << spec;
  }
}

TEST(Train, EmptyTrainingSetRejected) {
  BinaryDataset ds;
  ds.dim = 2;
  ds.classNames = {"0", "1"};
  EXPECT_ANY_THROW(trainBuiltin(ds, ModelSpec::parse("logistic"), 1));
}

TEST(ModelSpecText, ParseAndPrint) {
  EXPECT_EQ(ModelSpec::parse("mlp:16,8").hidden, (std::vector<std::size_t>{16, 8}));
  EXPECT_EQ(ModelSpec::parse("random-tree:4").depth, 4u);
  EXPECT_EQ(ModelSpec::parse("monomial:0,2").features, (FeatureSet{0, 2}));
  EXPECT_TRUE(ModelSpec::parse("tree").needsTraining());
  EXPECT_FALSE(ModelSpec::parse("parity").needsTraining());
  for (const char* s : {"logistic", "mlp:16,8", "tree:3", "constant:0", "monomial:1,4", "dictator:2",
                        "random-tree:4"}) {
    EXPECT_EQ(ModelSpec::parse(ModelSpec::parse(s).toString()).toString(), ModelSpec::parse(s).toString());
  }
  EXPECT_THROW(ModelSpec::parse("svm"), ContractViolation);
  EXPECT_THROW(ModelSpec::parse("constant:2"), ContractViolation);
  EXPECT_THROW(ModelSpec::parse("tree:x"), ContractViolation);
  EXPECT_THROW(makeFixedModel(3, ModelSpec::parse("mlp"), 1), ContractViolation);
}

TEST(RandomTree, DepthAndBothLabels) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    auto tree = makeRandomTree(20, 4, rng);
    EXPECT_EQ(tree->depth(), 4u);
    bool zero = false, one = false;
    for (const auto& n : tree->nodes()) {
      if (n.feature < 0) (n.label ? one : zero) = true;
    }
    EXPECT_TRUE(zero && one);
  }
}

TEST(SampleOracle, Examples) {
  auto one = OracleHandle::builtin(std::make_shared<ConstantModel>(4, 1));
  const auto dist = Distribution::uniform(4, 17);
  EXPECT_TRUE(sampleOracle(one, dist, 0).empty());
  const auto five = sampleOracle(one, dist, 5);
  ASSERT_EQ(five.size(), 5u);
  for (const auto& s : five) EXPECT_EQ(s.label, 1);
  EXPECT_EQ(sampleOracle(one, dist, 50), sampleOracle(one, dist, 50));
  EXPECT_EQ(one.queryCount(), 105u);
}

TEST(SampleConditioned, Examples) {
  auto h = OracleHandle::builtin(std::make_shared<ParityModel>(6));
  const Instance x = Instance::fromString("101100");
  const auto dist = Distribution::uniform(6, 3);
  for (const auto& s : sampleConditioned(h, dist, x, {0, 1, 2, 3, 4, 5}, 10)) {
    EXPECT_EQ(s.instance, x);
    EXPECT_EQ(s.label, h.predict(x));
  }
  EXPECT_EQ(sampleConditioned(h, dist, x, {}, 40), sampleOracle(h, dist, 40));
  const PartialInstance p = restrict(x, {1, 4});
  for (const auto& s : sampleConditioned(h, dist, x, {1, 4}, 200)) EXPECT_TRUE(covers(p, s.instance));
}

TEST(SampleConditioned, FreeCoordinateMarginals) {
  auto h = OracleHandle::builtin(std::make_shared<ConstantModel>(12, 0));
  const Instance x = Instance::ones(12);
  const FeatureSet s{2, 7, 9};
  const std::size_t m = 4000;
  const auto samples = sampleConditioned(h, Distribution::uniform(12, 99), x, s, m);
  const double bound = 3.0 * std::sqrt(0.25 / static_cast<double>(m));
  for (std::size_t j = 0; j < 12; ++j) {
    double ones = 0;
    for (const auto& smp : samples) ones += smp.instance[j];
    const double freq = ones / static_cast<double>(m);
    if (j == 2 || j == 7 || j == 9) {
      EXPECT_EQ(freq, 1.0);
    } else {
      EXPECT_NEAR(freq, 0.5, bound) << j;
    }
  }
}

TEST(SampleConditioned, EmpiricalRejectionAndInfeasible) {
  auto h = OracleHandle::builtin(std::make_shared<ConstantModel>(3, 1));
  const auto dist = Distribution::empirical(
      {Instance::fromString("100"), Instance::fromString("110"), Instance::fromString("011")}, 4);
  for (const auto& s : sampleConditioned(h, dist, Instance::fromString("111"), {0}, 30)) {
    EXPECT_TRUE(s.instance[0]);
  }
  try {
    sampleConditioned(h, dist, Instance::fromString("000"), {0, 2}, 5);
    FAIL();
  } catch (const ConditioningInfeasible& e) {
    EXPECT_EQ(e.covered(), 0u);
  }
}

TEST(Distribution, KindsAreReproducibleAndInRange) {
  const Instance c = Instance::fromString("1010101010");
  const std::vector<Distribution> dists{Distribution::uniform(10, 1),
                                        Distribution::productBernoulli(std::vector<double>(10, 0.9), 1),
                                        Distribution::empirical({c, Instance::ones(10)}, 1),
                                        Distribution::hammingBall(c, 2, 1)};
  for (const auto& d : dists) {
    Rng a(d.seed()), b(d.seed());
    for (int i = 0; i < 200; ++i) {
      const Instance z = d.sample(a);
      ASSERT_EQ(z, d.sample(b));
      ASSERT_EQ(z.dim(), 10u);
      if (d.kind() == Distribution::Kind::kHammingBall) {
        ASSERT_LE(bitwiseEquivalence(z, c).dim() - bitwiseEquivalence(z, c).popcount(), 2u);
      }
    }
  }
  EXPECT_TRUE(dists[0].isProductForm());
  EXPECT_FALSE(dists[2].isProductForm());
}

TEST(Distribution, HammingBallConditioningOutsideBall) {
  auto h = OracleHandle::builtin(std::make_shared<ConstantModel>(4, 1));
  const auto dist = Distribution::hammingBall(Instance::fromString("0000"), 1, 2);
  EXPECT_THROW(sampleConditioned(h, dist, Instance::fromString("1100"), {0, 1}, 3), ConditioningInfeasible);
}

}  // namespace
}  // namespace ruleseeker
