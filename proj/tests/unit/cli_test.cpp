#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ruleseeker/cli.hpp"

namespace ruleseeker {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ruleseeker");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = runCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("ruleseeker_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path toyCsv(const fs::path& dir) {
  std::ofstream(dir / "toy.csv") << "a,b,y\n1,10,no\n2,20,yes\n3,30,no\n4,40,yes\n";
  return dir / "toy.csv";
}

Explanation explanation(FeatureSet s, const std::string& anchor, int label) {
  Explanation e;
  e.features = std::move(s);
  e.anchor = Instance::fromString(anchor);
  e.anchorLabel = label;
  e.budget = e.features.size();
  return e;
}

TEST(RenderRule, Forms) {
  EXPECT_EQ(renderRule(explanation({0, 2}, "111", 1)), "IF feature_0=1 AND feature_2=1 THEN class=1");
  EXPECT_EQ(renderRule(explanation({}, "111", 0)), "IF (always) THEN class=0");
  EXPECT_EQ(renderRule(explanation({0, 1}, "10", 1), {"petal < 1", "sepal >= 3"}, "setosa"),
            "IF petal < 1 AND NOT sepal >= 3 THEN class=setosa");
}

TEST(CliPrepare, ToyCsvGivesSixFeatures) {
  const fs::path dir = scratch("prepare");
  const CliRun r = cli({"prepare", "--csv", toyCsv(dir).string(), "--target", "y", "--bins", "3", "--out",
                     (dir / "art").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("d = 6"), std::string::npos);
  std::ifstream in(dir / "art" / "dataset.txt");
  ASSERT_TRUE(in.good());
  const CliRun again = cli({"prepare", "--csv", toyCsv(dir).string(), "--target", "y", "--bins", "3", "--out",
                         (dir / "art2").string()});
  ASSERT_EQ(again.code, 0);
  for (const char* f : {"dataset.txt", "binarizer.json", "split.txt"}) {
    EXPECT_EQ(slurp(dir / "art" / f), slurp(dir / "art2" / f)) << f;
  }
}

TEST(CliPrepare, DataErrorsExitTwo) {
  const fs::path dir = scratch("prepare_bad");
  const CliRun missing = cli({"prepare", "--csv", toyCsv(dir).string(), "--target", "label", "--out", dir.string()});
  EXPECT_EQ(missing.code, 2);
  std::ofstream(dir / "ragged.csv") << "a,y\n1,0\n2\n";
  const CliRun ragged = cli({"prepare", "--csv", (dir / "ragged.csv").string(), "--target", "y", "--out",
                          dir.string()});
  EXPECT_EQ(ragged.code, 2);
  EXPECT_NE(ragged.err.find(":3:"), std::string::npos) << ragged.err;
}

TEST(CliExplain, MonomialOracleRule) {
  const fs::path dir = scratch("explain");
  const CliRun r = cli({"explain", "--oracle", "builtin:monomial:0,2", "--dim", "6", "--x", "111111", "--k", "2",
                     "--m", "400", "--seed", "3", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "IF feature_0=1 AND feature_2=1 THEN class=1");
  const auto j = nlohmann::json::parse(slurp(dir / "explanation.json"));
  EXPECT_EQ(j["features"], nlohmann::json::array({0, 2}));
  EXPECT_EQ(j["objective"], 0);
  EXPECT_EQ(j["optimal"], true);
  EXPECT_EQ(j["precision"]["disagreements"], 0);
  EXPECT_TRUE(fs::exists(dir / "timing.json"));
  EXPECT_TRUE(fs::exists(dir / "config.txt"));
}

TEST(CliExplain, ZeroBudgetAlwaysRule) {
  const CliRun r = cli({"explain", "--oracle", "builtin:parity", "--dim", "4", "--x", "1000", "--k", "0", "--m", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "IF (always) THEN class=1");
}

TEST(CliExplain, TinyTimeLimitIsNotOptimal) {
  const fs::path dir = scratch("explain_timeout");
  const CliRun r = cli({"explain", "--oracle", "builtin:random-tree:10", "--dim", "60", "--x",
                     std::string(60, '1'), "--k", "8", "--m", "6000", "--time-limit", "0.001",
                     "--eval-samples", "0", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "explanation.json"));
  EXPECT_EQ(j["optimal"], false);
  EXPECT_LE(j["features"].size(), 8u);
}

TEST(CliExplain, RerunIsByteIdentical) {
  const fs::path a = scratch("explain_a"), b = scratch("explain_b");
  for (const auto& dir : {a, b}) {
    const CliRun r = cli({"explain", "--dataset", std::string(RULESEEKER_DATA_DIR) + "/iris.manifest", "--oracle",
                       "builtin:logistic", "--instance", "7", "--k", "3", "--m", "300", "--seed", "11", "--out",
                       dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(a / "explanation.json"), slurp(b / "explanation.json"));
  EXPECT_EQ(slurp(a / "config.txt"), slurp(b / "config.txt"));
  const auto j = nlohmann::json::parse(slurp(a / "explanation.json"));
  EXPECT_TRUE(j.contains("class"));
  EXPECT_EQ(j["seed"], 11);
}

TEST(CliExplain, SettingsPrecedence) {
  const fs::path dir = scratch("precedence");
  std::ofstream(dir / "run.cfg") << "oracle = builtin:dictator:1\ndim = 3\nx = 010\nk = 1\nm = 30\nseed = 4\n";
  ::setenv("RULESEEKER_SEED", "99", 1);
  const CliRun fromFile = cli({"explain", "--config", (dir / "run.cfg").string(), "--out", (dir / "a").string()});
  const CliRun fromFlag = cli({"explain", "--config", (dir / "run.cfg").string(), "--seed", "5", "--out",
                            (dir / "b").string()});
  ::unsetenv("RULESEEKER_SEED");
  ASSERT_EQ(fromFile.code, 0) << fromFile.err;
  ASSERT_EQ(fromFlag.code, 0) << fromFlag.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "a" / "explanation.json"))["seed"], 4);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "b" / "explanation.json"))["seed"], 5);
  EXPECT_NE(slurp(dir / "a" / "config.txt").find("seed = 4"), std::string::npos);

  ::setenv("RULESEEKER_SEED", "99", 1);
  const CliRun fromEnv = cli({"explain", "--oracle", "builtin:dictator:1", "--dim", "3", "--x", "010", "--m", "20",
                           "--out", (dir / "c").string()});
  ::unsetenv("RULESEEKER_SEED");
  ASSERT_EQ(fromEnv.code, 0) << fromEnv.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "c" / "explanation.json"))["seed"], 99);
}

TEST(CliExitCodes, ConfigOracleAndContract) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"explain", "--bogus-flag"}).code, 1);
  EXPECT_EQ(cli({"explain", "--oracle", "builtin:parity", "--dim", "3"}).code, 1);
  EXPECT_EQ(cli({"explain", "--oracle", "builtin:parity", "--dim", "3", "--x", "01"}).code, 4);
  EXPECT_EQ(cli({"explain", "--oracle", "builtin:parity", "--dim", "3", "--x", "011", "--variant", "best"}).code, 1);
  EXPECT_EQ(cli({"explain", "--oracle", "exec:/nonexistent/oracle", "--x", "011"}).code, 3);
  const std::string crash = std::string("exec:") + RULESEEKER_MOCK_ORACLE + " --dim 3 --fault crash-after:0";
  const CliRun r = cli({"explain", "--oracle", crash, "--x", "011", "--m", "10"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("queries answered"), std::string::npos);
  EXPECT_EQ(cli({"explain", "--dataset", "/nonexistent/dir/x.manifest", "--instance", "0"}).code, 2);
}

TEST(CliEvaluate, WritesEvaluation) {
  const fs::path dir = scratch("evaluate");
  const CliRun r = cli({"evaluate", "--oracle", "builtin:monomial:0,2", "--dim", "5", "--x", "10100", "--features",
                     "0,2", "--eval-samples", "500", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "evaluation.json"));
  EXPECT_EQ(j["precision"]["disagreements"], 0);
  EXPECT_EQ(j["precision"]["samples"], 500);
  EXPECT_EQ(cli({"evaluate", "--oracle", "builtin:parity", "--dim", "3", "--x", "011"}).code, 1);
}

TEST(CliExportModel, DumpAndOpb) {
  const fs::path dir = scratch("export");
  const CliRun r = cli({"export-model", "--oracle", "builtin:parity:0,1", "--dim", "4", "--x", "1010", "--k", "2",
                     "--m", "64", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "instance.txt"));
  EXPECT_NE(slurp(dir / "model.opb").find("min:"), std::string::npos);
  const fs::path again = scratch("export_again");
  const CliRun r2 = cli({"export-model", "--from-dump", (dir / "instance.txt").string(), "--out", again.string()});
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(slurp(dir / "instance.txt"), slurp(again / "instance.txt"));
  EXPECT_EQ(slurp(dir / "model.opb"), slurp(again / "model.opb"));
}

TEST(CliBenchmark, MinimalConfigAndResume) {
  const fs::path dir = scratch("bench");
  std::ofstream(dir / "bench.cfg") << "name = mini\ndim = 8\noracle = builtin:random-tree:3\nk = 2\nm = 60\n"
                                      "variants = cop\ninstances = 2\nanchors = distribution\neval_samples = 100\n"
                                      "seed = 2\njobs = 1\n";
  const CliRun r = cli({"benchmark", "--config", (dir / "bench.cfg").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream rows(dir / "out" / "rows.csv");
  std::size_t lines = 0;
  for (std::string l; std::getline(rows, l);) ++lines;
  EXPECT_EQ(lines, 3u);
  const std::string summary = slurp(dir / "out" / "summary.csv");
  EXPECT_NE(summary.find("(±"), std::string::npos);
  const std::string table = slurp(dir / "out" / "table.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "name,variant,k,m,mean,std,meanTime");

  const std::string before = slurp(dir / "out" / "rows.csv");
  const CliRun resumed = cli({"benchmark", "--config", (dir / "bench.cfg").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(resumed.code, 0);
  EXPECT_EQ(slurp(dir / "out" / "rows.csv"), before);
}

TEST(CliBenchmark, ExitCodes) {
  const fs::path dir = scratch("bench_codes");
  std::ofstream(dir / "bad.cfg") << "nonsense_key = 1\n";
  EXPECT_EQ(cli({"benchmark", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o1").string()}).code, 1);
  std::ofstream(dir / "ok.cfg") << "dim = 4\noracle = builtin:parity\nanchors = distribution\ninstances = 1\n";
  EXPECT_EQ(cli({"benchmark", "--config", (dir / "ok.cfg").string()}).code, 1);
  std::ofstream(dir / "fail.cfg") << "dim = 4\noracle = exec:" << RULESEEKER_MOCK_ORACLE
                                  << " --dim 4 --fault crash-after:0\nanchors = distribution\ninstances = 2\n"
                                     "k = 1\nm = 10\njobs = 1\n";
  EXPECT_EQ(cli({"benchmark", "--config", (dir / "fail.cfg").string(), "--out", (dir / "o2").string()}).code, 5);
}

TEST(CliConformance, PassAndFail) {
  const CliRun ok = cli({"conformance", "--oracle", std::string("exec:") + RULESEEKER_MOCK_ORACLE + " --dim 5"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
  const CliRun bad =
      cli({"conformance", "--oracle", std::string("exec:") + RULESEEKER_MOCK_ORACLE + " --fault garbage"});
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(cli({"conformance", "--oracle", "builtin:parity"}).code, 1);
}

TEST(CliBinary, RunsAsProcess) {
  const std::string cmd = std::string(RULESEEKER_CLI) + " --version > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}

}  // namespace
}  // namespace ruleseeker
