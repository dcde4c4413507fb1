#include <gtest/gtest.h>

#include <chrono>
#include <string>

#include "ruleseeker/blackbox.hpp"
#include "ruleseeker/errors.hpp"

namespace ruleseeker {
namespace {

std::string mock(const std::string& args = "") { return std::string(RULESEEKER_MOCK_ORACLE) + " " + args; }

TEST(Protocol, HandshakeReportsDimension) {
  auto h = OracleHandle::external(mock("--dim 5"));
  EXPECT_EQ(h.kind(), OracleKind::kExternal);
  EXPECT_EQ(h.dim(), 5u);
  EXPECT_EQ(h.queryCount(), 0u);
}

TEST(Protocol, PredictPreservesOrderAndCountsQueries) {
  auto h = OracleHandle::external(mock("--dim 4 --label parity"));
  std::vector<Instance> batch{Instance::fromString("0000"), Instance::fromString("1000"),
                              Instance::fromString("1100"), Instance::fromString("1110")};
  EXPECT_EQ(h.predict(batch), (std::vector<int>{0, 1, 0, 1}));
  EXPECT_EQ(h.queryCount(), 4u);
  EXPECT_EQ(h.predict(Instance::fromString("0001")), 1);
  EXPECT_EQ(h.queryCount(), 5u);
}

TEST(Protocol, ExternalAgreesWithBuiltinOnLargeBatch) {
  auto ext = OracleHandle::external(mock("--dim 9 --label dictator:3"));
  auto in = OracleHandle::builtin(std::make_shared<DictatorModel>(9, 3));
  Rng rng(4);
  auto dist = Distribution::uniform(9, 4);
  std::vector<Instance> batch;
  for (int i = 0; i < 1000; ++i) batch.push_back(dist.sample(rng));
  EXPECT_EQ(ext.predict(batch), in.predict(batch));
}

TEST(Protocol, EmptyBatchSendsNothing) {
  auto h = OracleHandle::external(mock("--dim 3"));
  EXPECT_TRUE(h.predict(std::vector<Instance>{}).empty());
  EXPECT_EQ(h.queryCount(), 0u);
}

TEST(Protocol, DimensionMismatchIsContractViolation) {
  auto h = OracleHandle::external(mock("--dim 3"));
  EXPECT_THROW(h.predict(Instance::fromString("01")), ContractViolation);
}

TEST(Protocol, BadHandshakeIsProtocolError) {
  EXPECT_THROW(OracleHandle::external(mock("--fault bad-hello")), ProtocolError);
}

TEST(Protocol, MissingProgramIsUnavailable) {
  EXPECT_THROW(OracleHandle::external("/nonexistent/oracle-binary"), OracleUnavailable);
}

TEST(Protocol, CrashCarriesPartialProgress) {
  auto h = OracleHandle::external(mock("--dim 2 --fault crash-after:2"));
  h.predict(std::vector<Instance>{Instance::fromString("01"), Instance::fromString("11")});
  h.predict(Instance::fromString("10"));
  try {
    h.predict(Instance::fromString("00"));
    FAIL() << "expected OracleUnavailable";
  } catch (const OracleUnavailable& e) {
    EXPECT_EQ(e.answered(), 3u);
  }
}

TEST(Protocol, TimeoutIsUnavailable) {
  auto h = OracleHandle::external(mock("--dim 2 --fault hang"), std::chrono::milliseconds(300));
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW(h.predict(Instance::fromString("01")), OracleUnavailable);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(10));
}

TEST(Protocol, WrongArityIsProtocolError) {
  auto h = OracleHandle::external(mock("--dim 2 --fault arity"));
  EXPECT_THROW(h.predict(Instance::fromString("01")), ProtocolError);
}

TEST(Protocol, GarbageReplyIsProtocolError) {
  auto h = OracleHandle::external(mock("--dim 2 --fault garbage"));
  EXPECT_THROW(h.predict(Instance::fromString("01")), ProtocolError);
}

TEST(Protocol, OneVsRestOnExternalBinary) {
  auto h = OracleHandle::external(mock("--dim 2 --label dictator:0")).oneVsRest(0);
  EXPECT_EQ(h.predict(Instance::fromString("10")), 0);
  EXPECT_EQ(h.predict(Instance::fromString("01")), 1);
}

TEST(Protocol, ExecSpecParses) {
  auto s = OracleSpec::parse("exec:python3 serve.py --seed 1");
  EXPECT_EQ(s.kind, OracleSpec::Kind::kExec);
  EXPECT_EQ(s.command, "python3 serve.py --seed 1");
  EXPECT_EQ(s.toString(), "exec:python3 serve.py --seed 1");
  EXPECT_THROW(OracleSpec::parse("exec:"), ContractViolation);
  EXPECT_THROW(OracleSpec::parse("python3 serve.py"), ContractViolation);
}

TEST(Conformance, ConformingOraclePassesEveryStep) {
  const auto steps = runConformance(mock("--dim 6"));
  ASSERT_EQ(steps.size(), 8u);
  for (const auto& s : steps) EXPECT_TRUE(s.passed) << s.name << ": " << s.detail;
  EXPECT_EQ(steps[3].name, "predict batch of 1000");
}

bool allPassed(const std::vector<ConformanceStep>& steps) {
  for (const auto& s : steps) {
    if (!s.passed) return false;
  }
  return !steps.empty();
}

TEST(Conformance, FaultyOraclesFail) {
  for (const std::string fault : {"bad-hello", "arity", "garbage", "crash-after:1"}) {
    EXPECT_FALSE(allPassed(runConformance(mock("--dim 4 --fault " + fault), std::chrono::seconds(5)))) << fault;
  }
}

TEST(Conformance, HangIsReportedNotFatal) {
  const auto steps = runConformance(mock("--dim 4 --fault hang"), std::chrono::milliseconds(300));
  ASSERT_FALSE(steps.empty());
  EXPECT_FALSE(steps.back().passed);
}

TEST(Conformance, IgnoringByeFails) {
  const auto steps = runConformance(mock("--dim 4 --fault no-bye"), std::chrono::seconds(5));
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps.back().name, "bye ends the session");
  EXPECT_FALSE(steps.back().passed);
}

}  // namespace
}  // namespace ruleseeker
