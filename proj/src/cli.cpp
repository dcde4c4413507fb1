#include "ruleseeker/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ruleseeker/errors.hpp"
#include "ruleseeker/evaluate.hpp"
#include "ruleseeker/kvconfig.hpp"
#include "ruleseeker/solver.hpp"

namespace ruleseeker {
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string renderRule(const Explanation& e, const std::vector<std::string>& featureNames,
                       const std::string& className) {
  std::string s = "IF ";
  if (e.features.empty()) s += "(always)";
  for (std::size_t i = 0; i < e.features.size(); ++i) {
    const std::size_t j = e.features[i];
    const bool v = e.anchor[j];
    if (i) s += " AND ";
    if (j < featureNames.size()) {
      s += (v ? "" : "NOT ") + featureNames[j];
    } else {
      s += "feature_" + std::to_string(j) + "=" + (v ? "1" : "0");
    }
  }
  s += " THEN class=" + (className.empty() ? std::to_string(e.anchorLabel) : className);
  return s;
}

namespace {

// Flag values that were given on the command line, keyed like config files.
class FlagBinder {
 public:
  explicit FlagBinder(CLI::App* app) : app_(app) {}

  void add(const std::string& flag, const std::string& key, const std::string& help) {
    auto slot = std::make_unique<Slot>();
    slot->key = key;
    slot->option = app_->add_option(flag, slot->value, help);
    slots_.push_back(std::move(slot));
  }

  void applyTo(KeyValueConfig& kv) const {
    for (const auto& s : slots_) {
      if (s->option->count() > 0) kv.set(s->key, s->value);
    }
  }

 private:
  struct Slot {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
  };
  CLI::App* app_;
  std::vector<std::unique_ptr<Slot>> slots_;
};

struct Command {
  CLI::App* app = nullptr;
  std::unique_ptr<FlagBinder> flags;
  std::string configPath;
};

// defaults < RULESEEKER_SEED < config file < flags
KeyValueConfig mergeSettings(const Command& cmd, const std::map<std::string, std::string>& defaults) {
  KeyValueConfig kv;
  for (const auto& [k, v] : defaults) kv.set(k, v);
  if (const char* env = std::getenv("RULESEEKER_SEED"); env != nullptr && *env != '\0') kv.set("seed", env);
  if (!cmd.configPath.empty()) {
    const KeyValueConfig file = KeyValueConfig::load(cmd.configPath);
    for (const auto& [k, v] : file.entries()) kv.set(k, v);
  }
  cmd.flags->applyTo(kv);
  return kv;
}

std::uint64_t parseSeed(const std::string& text) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos, 0);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed must be a non-negative integer, got '" + text + "'");
  }
}

std::size_t parseCount(const KeyValueConfig& kv, const std::string& key) {
  const std::string v = kv.getOr(key, "");
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (pos != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' must be a non-negative integer, got '" + v + "'");
  }
}

double parsePositive(const KeyValueConfig& kv, const std::string& key) {
  const std::string v = kv.getOr(key, "");
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !(d > 0.0)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' must be a positive number, got '" + v + "'");
  }
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string echoConfig(const KeyValueConfig& kv) {
  std::ostringstream o;
  o << "# effective configuration\n# seed derivation: " << kSeedScheme << '\n';
  for (const auto& [k, v] : kv.entries()) {
    if (k != "out") o << k << " = " << v << '\n';
  }
  return o.str();
}

// Common pipeline inputs shared by explain, evaluate and export-model.
struct Pipeline {
  KeyValueConfig kv;
  std::uint64_t seed = 0;
  OracleContext ctx;
  OracleHandle oracle() const { return *ctx.oracle; }
  Instance anchor;
  std::string anchorId;
  std::optional<Distribution> dist;

  int anchorClass = -1;
  std::optional<OracleHandle> view;

  std::string className(int label) const {
    if (!ctx.dataset) return "";
    const auto& names = ctx.dataset->classNames;
    if (anchorClass >= 0) {
      return label == 1 ? names[static_cast<std::size_t>(anchorClass)] : "not " + names[static_cast<std::size_t>(anchorClass)];
    }
    if (ctx.oracle->kind() == OracleKind::kBuiltin && names.size() == 2) return names[static_cast<std::size_t>(label)];
    return "";
  }
  std::vector<std::string> featureNames() const { return ctx.dataset ? ctx.dataset->featureNames : std::vector<std::string>{}; }
};

Pipeline buildPipeline(const KeyValueConfig& kv) {
  Pipeline p;
  p.kv = kv;
  p.seed = parseSeed(kv.getOr("seed", "0"));
  const std::size_t dim = kv.has("dim") ? parseCount(kv, "dim") : 0;
  p.ctx = makeOracleContext(kv.getOr("dataset", ""), dim, kv.getOr("oracle", "builtin:mlp"), p.seed);
  const std::size_t d = p.ctx.oracle->dim();

  const std::string bits = kv.getOr("x", "");
  const std::string row = kv.getOr("instance", "");
  if (!bits.empty()) {
    p.anchor = Instance::fromString(bits);
    if (p.anchor.dim() != d) {
      throw ContractViolation("anchor has " + std::to_string(p.anchor.dim()) + " bits, oracle expects " +
                              std::to_string(d));
    }
    p.anchorId = "x:" + bits;
  } else if (!row.empty()) {
    if (!p.ctx.dataset) throw ConfigError("--instance selects a dataset row; pass --dataset or use --x");
    const std::size_t i = parseCount(kv, "instance");
    if (i >= p.ctx.dataset->size()) {
      throw ContractViolation("instance " + row + " is out of range (dataset has " +
                              std::to_string(p.ctx.dataset->size()) + " rows)");
    }
    p.anchor = p.ctx.dataset->instances[i];
    p.anchorId = "row:" + row;
  } else {
    throw ConfigError("select an anchor with --instance <row> or --x <bitstring>");
  }

  const std::string dist = kv.getOr("distribution", "uniform");
  if (dist == "uniform") {
    p.dist = Distribution::uniform(d);
  } else if (dist == "empirical") {
    if (!p.ctx.dataset) throw ConfigError("the empirical distribution needs a dataset");
    std::vector<Instance> rows;
    for (auto i : p.ctx.dataset->trainOrAll()) rows.push_back(p.ctx.dataset->instances[i]);
    p.dist = Distribution::empirical(std::move(rows));
  } else {
    throw ConfigError("distribution must be 'uniform' or 'empirical'");
  }
  p.view = anchorView(*p.ctx.oracle, p.anchor, p.anchorClass);
  return p;
}

ExplainOptions explainOptions(const Pipeline& p) {
  ExplainOptions o;
  o.budget = parseCount(p.kv, "k");
  o.samples = parseCount(p.kv, "m");
  o.timeLimit = parsePositive(p.kv, "time_limit");
  o.seed = deriveSeed(p.seed, "sample");
  o.beamWidth = parseCount(p.kv, "beam_width");
  o.nodeLimit = parseCount(p.kv, "node_limit");
  try {
    o.variant = parseVariant(p.kv.getOr("variant", "cop"));
    o.cardinality = parseCardinality(p.kv.getOr("cardinality", "exact"));
    parseConditioning(p.kv.getOr("conditioning", "exact"));
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  return o;
}

ojson precisionJson(const PrecisionEstimate& pe) {
  return {{"disagreements", pe.value.numerator},
          {"samples", pe.samplesUsed},
          {"value", pe.toDouble()},
          {"stderr", pe.standardError},
          {"conditioning", toString(pe.conditioning)}};
}

std::map<std::string, std::string> pipelineDefaults() {
  return {{"oracle", "builtin:mlp"}, {"k", "3"},          {"m", "1000"},         {"variant", "cop"},
          {"time_limit", "60"},      {"seed", "0"},       {"eval_samples", "1000"}, {"conditioning", "exact"},
          {"distribution", "uniform"}, {"beam_width", "1"}, {"cardinality", "exact"}, {"node_limit", "0"}};
}

void addPipelineFlags(FlagBinder& f) {
  f.add("--dataset", "dataset", "Prepared artifact directory or dataset manifest");
  f.add("--dim", "dim", "Input dimension for fixed models without a dataset");
  f.add("--oracle", "oracle", "builtin:<model spec> or exec:<command line>");
  f.add("--instance", "instance", "Anchor row index in the dataset");
  f.add("--x", "x", "Anchor as an inline bitstring");
  f.add("--k", "k", "Explanation budget");
  f.add("--m", "m", "Training samples drawn from the oracle");
  f.add("--variant", "variant", "cop | sat | greedy");
  f.add("--time-limit", "time_limit", "Solver time limit in seconds");
  f.add("--seed", "seed", "Root seed (default: RULESEEKER_SEED or 0)");
  f.add("--eval-samples", "eval_samples", "Samples for the precision estimate (0 skips it)");
  f.add("--conditioning", "conditioning", "exact | reject");
  f.add("--distribution", "distribution", "uniform | empirical");
  f.add("--beam-width", "beam_width", "Beam width of the greedy baseline");
  f.add("--cardinality", "cardinality", "exact | literal");
  f.add("--node-limit", "node_limit", "Branch-and-bound node limit (0: none)");
}

int cmdPrepare(const KeyValueConfig& kv, std::ostream& out) {
  Manifest m;
  if (kv.has("manifest")) {
    m = loadManifest(kv.getOr("manifest", ""));
  } else if (!kv.has("csv")) {
    throw ConfigError("prepare needs --manifest or --csv");
  }
  if (kv.has("csv")) m.csvPath = kv.getOr("csv", "");
  if (kv.has("target")) m.schema.target = kv.getOr("target", "");
  if (kv.has("bins")) m.binCount = parseCount(kv, "bins");
  if (kv.has("strategy")) m.strategy = parseBinStrategy(kv.getOr("strategy", "quantile"));
  if (kv.has("test_ratio")) m.testRatio = kv.getDouble("test_ratio", m.testRatio);
  if (kv.has("split_seed")) m.splitSeed = parseSeed(kv.getOr("split_seed", "1"));
  if (kv.has("positive_class")) m.positiveClass = kv.getOr("positive_class", "");
  if (m.name.empty()) m.name = fs::path(m.csvPath).stem().string();
  if (m.schema.target.empty()) throw ConfigError("prepare needs a target column (--target or manifest)");
  const std::string dir = kv.getOr("out", "");
  if (dir.empty()) throw ConfigError("prepare needs --out <directory>");

  const PreparedDataset prepared = prepareDataset(m);
  writeArtifacts(prepared, dir);
  out << "prepared " << m.name << ": " << prepared.data.size() << " rows, d = " << prepared.data.dim << " features, "
      << prepared.data.numClasses() << " classes (" << prepared.data.train.size() << " train / "
      << prepared.data.test.size() << " test)\n";
  out << "artifacts written to " << dir << '\n';
  return exit_code::kOk;
}

int cmdExplain(const KeyValueConfig& kv, std::ostream& out) {
  Pipeline p = buildPipeline(kv);
  const ExplainOptions opt = explainOptions(p);
  const ExplainResult res = explainInstance(*p.view, *p.dist, p.anchor, opt);
  const Explanation& e = res.explanation;
  const auto names = p.featureNames();
  const std::string className = p.className(e.anchorLabel);
  const std::string rule = renderRule(e, names, className);

  std::optional<PrecisionEstimate> pe;
  const std::size_t evalSamples = parseCount(kv, "eval_samples");
  if (evalSamples > 0) {
    Rng rng(deriveSeed(p.seed, "eval"));
    pe = estimatePrecision(*p.view, *p.dist, p.anchor, e.features, evalSamples, rng,
                           parseConditioning(kv.getOr("conditioning", "exact")));
  }

  out << rule << '\n';
  out << "features: {" << formatFeatureList(e.features, ',') << "}  (k = " << opt.budget << ")\n";
  out << "objective: " << res.report.objective << " of " << opt.samples << " samples (" << toString(opt.variant)
      << "), full objective " << res.report.fullObjective << '\n';
  out << "optimal: " << (e.optimal ? "yes" : "no") << (res.report.neverFires ? " (never-firing hypothesis)" : "")
      << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", res.report.elapsed);
  out << "elapsed: " << buf << " s, " << res.report.nodesExplored << " nodes\n";
  if (pe) {
    std::snprintf(buf, sizeof buf, "%.4f (stderr %.4f)", pe->toDouble(), pe->standardError);
    out << "precision error: " << buf << " over " << pe->samplesUsed << " samples\n";
  }
  if (p.ctx.trainAccuracy >= 0) {
    std::snprintf(buf, sizeof buf, "%.3f", p.ctx.trainAccuracy);
    out << "model train accuracy: " << buf;
    if (p.ctx.testAccuracy >= 0) {
      std::snprintf(buf, sizeof buf, "%.3f", p.ctx.testAccuracy);
      out << ", test accuracy: " << buf;
    }
    out << '\n';
  }

  const std::string dir = kv.getOr("out", "");
  if (!dir.empty()) {
    fs::create_directories(dir);
    ojson j;
    j["anchor"] = p.anchorId;
    j["anchor_bits"] = e.anchor.toString();
    j["anchor_label"] = e.anchorLabel;
    if (!className.empty()) j["class"] = className;
    j["oracle"] = p.view->describe();
    j["k"] = opt.budget;
    j["m"] = opt.samples;
    j["variant"] = toString(opt.variant);
    j["cardinality"] = toString(opt.cardinality);
    j["features"] = e.features;
    std::vector<std::string> fn;
    for (auto f : e.features) fn.push_back(f < names.size() ? names[f] : "feature_" + std::to_string(f));
    j["feature_names"] = fn;
    j["rule"] = rule;
    j["objective"] = res.report.objective;
    j["full_objective"] = res.report.fullObjective;
    j["optimal"] = e.optimal;
    j["never_fires"] = res.report.neverFires;
    j["seed"] = p.seed;
    j["seed_scheme"] = std::string(kSeedScheme);
    if (pe) j["precision"] = precisionJson(*pe);
    writeText(fs::path(dir) / "explanation.json", j.dump(2) + "\n");
    ojson t;
    t["elapsed_seconds"] = res.report.elapsed;
    t["nodes"] = res.report.nodesExplored;
    ojson hist = ojson::array();
    for (const auto& h : res.report.incumbentHistory) hist.push_back({h.seconds, h.objective});
    t["incumbent_history"] = hist;
    writeText(fs::path(dir) / "timing.json", t.dump(2) + "\n");
    writeText(fs::path(dir) / "config.txt", echoConfig(kv));
  }
  return exit_code::kOk;
}

int cmdEvaluate(const KeyValueConfig& kv, std::ostream& out) {
  Pipeline p = buildPipeline(kv);
  if (!kv.has("features")) throw ConfigError("evaluate needs --features (e.g. 0,3)");
  const FeatureSet s = normalizeFeatures(parseFeatureList(kv.getOr("features", "")), p.anchor.dim());
  std::size_t m = parseCount(kv, "eval_samples");
  if (m == 0) throw ConfigError("eval_samples must be positive");
  Rng rng(deriveSeed(p.seed, "eval"));
  const PrecisionEstimate pe =
      estimatePrecision(*p.view, *p.dist, p.anchor, s, m, rng, parseConditioning(kv.getOr("conditioning", "exact")));
  Explanation e;
  e.features = s;
  e.budget = s.size();
  e.anchor = p.anchor;
  e.anchorLabel = p.view->predict(p.anchor);
  Rng lossRng(deriveSeed(p.seed, "loss"));
  const Rational loss = estimateLoss(*p.view, *p.dist, ruleFromExplanation(e), m, lossRng);
  const std::string rule = renderRule(e, p.featureNames(), p.className(e.anchorLabel));

  char buf[96];
  out << rule << '\n';
  std::snprintf(buf, sizeof buf, "%.4f (stderr %.4f)", pe.toDouble(), pe.standardError);
  out << "precision error: " << buf << " over " << pe.samplesUsed << " samples\n";
  std::snprintf(buf, sizeof buf, "%.4f (stderr %.4f)", loss.toDouble(), binomialStandardError(loss));
  out << "rule loss: " << buf << " over " << m << " samples\n";

  const std::string dir = kv.getOr("out", "");
  if (!dir.empty()) {
    fs::create_directories(dir);
    ojson j;
    j["anchor"] = p.anchorId;
    j["anchor_label"] = e.anchorLabel;
    j["features"] = s;
    j["rule"] = rule;
    j["precision"] = precisionJson(pe);
    j["rule_loss"] = {{"disagreements", loss.numerator}, {"samples", loss.denominator}, {"value", loss.toDouble()}};
    j["seed"] = p.seed;
    writeText(fs::path(dir) / "evaluation.json", j.dump(2) + "\n");
    writeText(fs::path(dir) / "config.txt", echoConfig(kv));
  }
  return exit_code::kOk;
}

int cmdExportModel(const KeyValueConfig& kv, std::ostream& out) {
  SolveInstance inst;
  if (kv.has("from_dump")) {
    std::ifstream in(kv.getOr("from_dump", ""));
    if (!in) throw LoadError(LoadError::Kind::kUnreadable, "cannot read " + kv.getOr("from_dump", ""));
    inst = readInstanceDump(in);
  } else {
    Pipeline p = buildPipeline(kv);
    const ExplainOptions opt = explainOptions(p);
    const int fx = p.view->predict(p.anchor);
    Rng rng(opt.seed);
    const auto samples = sampleOracle(*p.view, *p.dist, opt.samples, rng);
    const auto examples = toMonomialExamples(p.anchor, fx, samples);
    inst = SolveInstance::fromExamples(examples, p.anchor.dim(), std::min(opt.budget, p.anchor.dim()), opt.variant);
  }
  inst.cardinality = parseCardinality(kv.getOr("cardinality", "exact"));
  const std::string dir = kv.getOr("out", "");
  if (dir.empty()) throw ConfigError("export-model needs --out <directory>");
  fs::create_directories(dir);
  std::ostringstream dump, opb;
  writeInstanceDump(dump, inst);
  writeOpbModel(opb, inst);
  writeText(fs::path(dir) / "instance.txt", dump.str());
  writeText(fs::path(dir) / "model.opb", opb.str());
  out << "exported d = " << inst.dim << ", k = " << inst.budget << ", " << inst.examples.size()
      << " weighted examples (" << toString(inst.variant) << ", " << toString(inst.cardinality) << ") to " << dir
      << '\n';
  return exit_code::kOk;
}

int cmdBenchmark(const KeyValueConfig& kvIn, const std::string& configPath, std::ostream& out) {
  KeyValueConfig kv = kvIn;
  const std::string dir = kv.getOr("out", "");
  if (dir.empty()) throw ConfigError("benchmark needs --out <directory>");
  KeyValueConfig bench;
  for (const auto& [k, v] : kv.entries()) {
    if (k != "out") bench.set(k, v);
  }
  if (const auto ds = bench.get("dataset"); ds && !ds->empty() && fs::path(*ds).is_relative() && !configPath.empty()) {
    const fs::path beside = fs::path(configPath).parent_path() / *ds;
    if (!fs::exists(*ds) && fs::exists(beside)) bench.set("dataset", beside.string());
  }
  const BenchmarkConfig cfg = BenchmarkConfig::fromKeyValue(bench);
  const EvalReport rep = runBenchmark(cfg, dir);

  out << "benchmark " << rep.name << ": " << rep.rows.size() << " rows, " << rep.failedRows << " failed\n";
  for (const auto& c : rep.cells) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-6s k=%-3zu m=%-6zu %s  n=%zu  time %.3f s", toString(c.variant).c_str(), c.k,
                  c.m, formatMeanStd(c.mean, c.std).c_str(), c.rows, c.meanSeconds);
    out << buf << '\n';
  }
  out << "results written to " << dir << '\n';
  if (!rep.rows.empty() && rep.failedRows == rep.rows.size()) return exit_code::kAllRowsFailed;
  return exit_code::kOk;
}

int cmdConformance(const KeyValueConfig& kv, std::ostream& out) {
  const std::string spec = kv.getOr("oracle", "");
  if (spec.empty()) throw ConfigError("conformance needs --oracle exec:<command line>");
  const OracleSpec s = OracleSpec::parse(spec);
  if (s.kind != OracleSpec::Kind::kExec) throw ConfigError("conformance runs against an exec: oracle");
  const auto steps = runConformance(s.command);
  bool all = !steps.empty();
  for (const auto& st : steps) {
    out << (st.passed ? "PASS " : "FAIL ") << st.name;
    if (!st.passed && !st.detail.empty()) out << ": " << st.detail;
    out << '\n';
    all = all && st.passed;
  }
  return all ? exit_code::kOk : exit_code::kOracle;
}

}  // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum-error rule explanations for black-box classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ruleseeker 1.0");

  std::map<std::string, Command> cmds;
  auto addCommand = [&](const std::string& name, const std::string& help) -> Command& {
    Command& c = cmds[name];
    c.app = app.add_subcommand(name, help);
    c.flags = std::make_unique<FlagBinder>(c.app);
    c.app->add_option("--config", c.configPath, "Settings file (key = value lines)");
    c.flags->add("--out", "out", "Output directory");
    return c;
  };

  Command& prepare = addCommand("prepare", "Binarize a CSV dataset into artifacts");
  prepare.flags->add("--manifest", "manifest", "Dataset manifest");
  prepare.flags->add("--csv", "csv", "Raw CSV (overrides the manifest)");
  prepare.flags->add("--target", "target", "Target column");
  prepare.flags->add("--bins", "bins", "Bins per numeric attribute");
  prepare.flags->add("--strategy", "strategy", "quantile | uniform");
  prepare.flags->add("--test-ratio", "test_ratio", "Fraction of rows held out");
  prepare.flags->add("--split-seed", "split_seed", "Seed of the train/test split");
  prepare.flags->add("--positive-class", "positive_class", "Class forced to label 1 of a binary target");

  Command& explain = addCommand("explain", "Explain one instance with a minimum-error k-rule");
  addPipelineFlags(*explain.flags);

  Command& evaluate = addCommand("evaluate", "Estimate the precision error of a given feature set");
  addPipelineFlags(*evaluate.flags);
  evaluate.flags->add("--features", "features", "Feature indices, e.g. 0,3");

  Command& bench = addCommand("benchmark", "Run a benchmark sweep from a config file");
  bench.flags->add("--dataset", "dataset", "Prepared artifact directory or dataset manifest");
  bench.flags->add("--oracle", "oracle", "builtin:<model spec> or exec:<command line>");
  bench.flags->add("--k", "k", "Budgets, e.g. 1,3,5");
  bench.flags->add("--m", "m", "Training sample sizes, e.g. 50,200");
  bench.flags->add("--variant", "variants", "Variants, e.g. cop,sat,greedy");
  bench.flags->add("--instances", "instances", "Anchors per dataset");
  bench.flags->add("--time-limit", "time_limit", "Solver time limit in seconds");
  bench.flags->add("--seed", "seed", "Root seed");
  bench.flags->add("--jobs", "jobs", "Parallel rows (default: all processors)");
  bench.flags->add("--eval-samples", "eval_samples", "Samples per precision estimate");
  bench.flags->add("--conditioning", "conditioning", "exact | reject");

  Command& exportModel = addCommand("export-model", "Write the solver instance dump and its OPB model");
  addPipelineFlags(*exportModel.flags);
  exportModel.flags->add("--from-dump", "from_dump", "Convert an existing instance dump instead of sampling");

  Command& conformance = addCommand("conformance", "Check an external oracle against wire protocol v1");
  conformance.flags->add("--oracle", "oracle", "exec:<command line>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kOk : exit_code::kConfig;
  }

  try {
    for (auto& [name, cmd] : cmds) {
      if (!cmd.app->parsed()) continue;
      if (name == "prepare") return cmdPrepare(mergeSettings(cmd, {}), out);
      if (name == "explain") return cmdExplain(mergeSettings(cmd, pipelineDefaults()), out);
      if (name == "evaluate") return cmdEvaluate(mergeSettings(cmd, pipelineDefaults()), out);
      if (name == "export-model") return cmdExportModel(mergeSettings(cmd, pipelineDefaults()), out);
      if (name == "benchmark") return cmdBenchmark(mergeSettings(cmd, {}), cmd.configPath, out);
      if (name == "conformance") return cmdConformance(mergeSettings(cmd, {}), out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_code::kConfig;
  } catch (const LoadError& e) {
    err << "data error: " << e.what() << '\n';
    return exit_code::kData;
  } catch (const ConditioningInfeasible& e) {
    err << "data error: " << e.what() << '\n';
    return exit_code::kData;
  } catch (const OracleUnavailable& e) {
    err << "oracle error: " << e.what() << " (" << e.answered() << " queries answered)\n";
    return exit_code::kOracle;
  } catch (const ProtocolError& e) {
    err << "oracle error: " << e.what() << '\n';
    return exit_code::kOracle;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << '\n';
    return exit_code::kSolver;
  } catch (const EnumerationRefused& e) {
    err << "solver error: " << e.what() << '\n';
    return exit_code::kSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kConfig;
  }
  return exit_code::kConfig;
}

}  // namespace ruleseeker
