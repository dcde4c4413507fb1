#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ruleseeker/errors.hpp"
#include "ruleseeker/evaluate.hpp"

namespace ruleseeker {
namespace fs = std::filesystem;

namespace {

std::string anchorsName(AnchorSource a) { return a == AnchorSource::kTestSplit ? "test" : "distribution"; }
std::string distributionName(SamplingDistribution d) {
  return d == SamplingDistribution::kUniform ? "uniform" : "empirical";
}

template <typename T>
std::string joinList(const std::vector<T>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_same_v<T, Variant>) {
      s += toString(items[i]);
    } else {
      s += std::to_string(items[i]);
    }
  }
  return s;
}

std::vector<std::size_t> parseSizes(const KeyValueConfig& kv, const std::string& key,
                                    const std::vector<std::size_t>& fallback) {
  if (!kv.has(key)) return fallback;
  std::vector<std::size_t> out;
  for (const auto& item : kv.getList(key)) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("'" + key + "' expects a list of non-negative integers, got '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("'" + key + "' must not be empty");
  return out;
}

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::json rowToJson(const BenchmarkRow& r) {
  return {{"anchor", r.anchorIndex},     {"id", r.instanceId},
          {"k", r.k},                    {"m", r.m},
          {"variant", toString(r.variant)}, {"ok", r.ok},
          {"error", r.error},            {"features", r.features},
          {"label", r.anchorLabel},      {"objective", r.objective},
          {"full_objective", r.fullObjective}, {"optimal", r.optimal},
          {"nodes", r.nodes},            {"disagreements", r.disagreements},
          {"eval_samples", r.evalSamples}, {"seconds", r.seconds}};
}

BenchmarkRow rowFromJson(const nlohmann::json& j) {
  BenchmarkRow r;
  r.anchorIndex = j.at("anchor").get<std::size_t>();
  r.instanceId = j.at("id").get<std::string>();
  r.k = j.at("k").get<std::size_t>();
  r.m = j.at("m").get<std::size_t>();
  r.variant = parseVariant(j.at("variant").get<std::string>());
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.features = j.at("features").get<FeatureSet>();
  r.anchorLabel = j.at("label").get<int>();
  r.objective = j.at("objective").get<std::uint64_t>();
  r.fullObjective = j.at("full_objective").get<std::uint64_t>();
  r.optimal = j.at("optimal").get<bool>();
  r.nodes = j.at("nodes").get<std::uint64_t>();
  r.disagreements = j.at("disagreements").get<std::uint64_t>();
  r.evalSamples = j.at("eval_samples").get<std::size_t>();
  r.seconds = j.at("seconds").get<double>();
  return r;
}

struct Setup {
  OracleContext ctx;
  std::optional<Distribution> dist;
  std::vector<Instance> anchors;
  std::vector<std::string> anchorIds;
};

Setup buildSetup(const BenchmarkConfig& cfg) {
  Setup s;
  s.ctx = makeOracleContext(cfg.dataset, cfg.dim, cfg.oracle, cfg.seed);
  const auto& ds = s.ctx.dataset;
  const std::size_t dim = s.ctx.oracle->dim();

  if (cfg.distribution == SamplingDistribution::kEmpirical) {
    if (!ds) throw ConfigError("the empirical distribution needs a dataset");
    std::vector<Instance> rows;
    for (auto i : ds->trainOrAll()) rows.push_back(ds->instances[i]);
    s.dist = Distribution::empirical(std::move(rows));
  } else {
    s.dist = Distribution::uniform(dim);
  }

  Rng rng(deriveSeed(cfg.seed, "anchors"));
  if (cfg.anchors == AnchorSource::kTestSplit) {
    if (!ds) throw ConfigError("anchors = test needs a dataset");
    std::vector<std::size_t> pool = ds->test.empty() ? ds->trainOrAll() : ds->test;
    for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
    pool.resize(std::min(pool.size(), cfg.instances));
    for (auto i : pool) {
      s.anchors.push_back(ds->instances[i]);
      s.anchorIds.push_back("row:" + std::to_string(i));
    }
  } else {
    for (std::size_t i = 0; i < cfg.instances; ++i) {
      s.anchors.push_back(s.dist->sample(rng));
      s.anchorIds.push_back("draw:" + std::to_string(i));
    }
  }
  return s;
}

void runRow(const BenchmarkConfig& cfg, const Setup& s, BenchmarkRow& row) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Instance& x = s.anchors[row.anchorIndex];
    int anchorClass = -1;
    const OracleHandle h = anchorView(*s.ctx.oracle, x, anchorClass);
    ExplainOptions opt;
    opt.budget = row.k;
    opt.variant = row.variant;
    opt.samples = row.m;
    opt.timeLimit = cfg.timeLimit;
    opt.seed = deriveSeed(cfg.seed, "sample:" + row.instanceId + ":" + std::to_string(row.m));
    opt.beamWidth = cfg.beamWidth;
    opt.cardinality = cfg.cardinality;
    const ExplainResult res = explainInstance(h, *s.dist, x, opt);
    row.features = res.explanation.features;
    row.anchorLabel = res.explanation.anchorLabel;
    row.objective = res.report.objective;
    row.fullObjective = res.report.fullObjective;
    row.optimal = res.report.optimal;
    row.nodes = res.report.nodesExplored;
    row.seconds = res.report.elapsed;
    Rng evalRng(deriveSeed(cfg.seed, "eval:" + row.instanceId));
    const PrecisionEstimate pe =
        estimatePrecision(h, *s.dist, x, row.features, cfg.evalSamples, evalRng, cfg.conditioning);
    row.disagreements = pe.value.numerator;
    row.evalSamples = pe.samplesUsed;
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
}

void writeFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string rowsCsv(const EvalReport& rep, const std::vector<std::string>& names) {
  std::ostringstream o;
  o << "instance,k,m,variant,status,features,feature_names,size,anchor_label,objective,full_objective,optimal,"
       "nodes,disagreements,eval_samples,precision_error,error\n";
  for (const auto& r : rep.rows) {
    std::string featureNames;
    for (std::size_t i = 0; i < r.features.size(); ++i) {
      if (i) featureNames += ';';
      featureNames += r.features[i] < names.size() ? names[r.features[i]] : "X_" + std::to_string(r.features[i]);
    }
    o << r.instanceId << ',' << r.k << ',' << r.m << ',' << toString(r.variant) << ',' << (r.ok ? "ok" : "failed")
      << ',' << formatFeatureList(r.features, ';') << ',' << csvField(featureNames) << ',' << r.features.size()
      << ',' << r.anchorLabel << ',' << r.objective << ',' << r.fullObjective << ',' << (r.optimal ? 1 : 0) << ','
      << r.nodes << ',' << r.disagreements << ',' << r.evalSamples << ','
      << (r.ok ? fixed(r.precisionError()) : std::string()) << ',' << csvField(r.error) << '\n';
  }
  return o.str();
}

std::string summaryCsv(const EvalReport& rep) {
  std::ostringstream o;
  o << "name,k,m,variant,rows,failed,mean,std,sem,cell\n";
  for (const auto& c : rep.cells) {
    o << csvField(rep.name) << ',' << c.k << ',' << c.m << ',' << toString(c.variant) << ',' << c.rows << ','
      << c.failed << ',' << fixed(c.mean) << ',' << fixed(c.std) << ',' << fixed(c.sem) << ','
      << csvField(formatMeanStd(c.mean, c.std)) << '\n';
  }
  return o.str();
}

std::string tableCsv(const EvalReport& rep) {
  std::ostringstream o;
  o << "name,variant,k,m,mean,std,meanTime\n";
  for (const auto& c : rep.cells) {
    o << csvField(rep.name) << ',' << toString(c.variant) << ',' << c.k << ',' << c.m << ',' << fixed(c.mean, 2)
      << ',' << fixed(c.std, 2) << ',' << fixed(c.meanSeconds, 3) << '\n';
  }
  return o.str();
}

std::string timingsCsv(const EvalReport& rep) {
  std::ostringstream o;
  o << "instance,k,m,variant,seconds\n";
  for (const auto& r : rep.rows) {
    o << r.instanceId << ',' << r.k << ',' << r.m << ',' << toString(r.variant) << ',' << fixed(r.seconds) << '\n';
  }
  return o.str();
}

}  // namespace

BinaryDataset loadBinaryDataset(const std::string& path) {
  if (fs::is_directory(path)) return readArtifacts(path);
  return prepareDataset(loadManifest(path)).data;
}

OracleContext makeOracleContext(const std::string& dataset, std::size_t dim, const std::string& oracleSpec,
                                std::uint64_t rootSeed) {
  OracleContext c;
  if (!dataset.empty()) c.dataset = loadBinaryDataset(dataset);
  const std::size_t d = c.dataset ? c.dataset->dim : dim;
  const OracleSpec spec = OracleSpec::parse(oracleSpec);
  if (spec.kind == OracleSpec::Kind::kExec) {
    c.oracle = OracleHandle::external(spec.command);
  } else if (spec.model.needsTraining()) {
    if (!c.dataset) throw ConfigError("oracle '" + oracleSpec + "' must be trained on a dataset");
    const TrainResult tr = trainBuiltin(*c.dataset, spec.model, deriveSeed(rootSeed, "train"));
    c.trainAccuracy = tr.trainAccuracy;
    if (!c.dataset->test.empty()) c.testAccuracy = accuracy(*tr.model, *c.dataset, c.dataset->test);
    c.constantWarning = tr.constantWarning;
    c.oracle = OracleHandle::builtin(tr.model);
  } else {
    if (d == 0) throw ConfigError("a fixed model without a dataset needs a positive dimension");
    c.oracle = OracleHandle::builtin(makeFixedModel(d, spec.model, deriveSeed(rootSeed, "model")));
  }
  if (c.dataset && c.oracle->dim() != c.dataset->dim) {
    throw ContractViolation("oracle dimension " + std::to_string(c.oracle->dim()) +
                            " differs from dataset dimension " + std::to_string(c.dataset->dim));
  }
  return c;
}

OracleHandle anchorView(const OracleHandle& h, const Instance& x, int& anchorClass) {
  anchorClass = -1;
  if (h.kind() == OracleKind::kBuiltin && h.numClasses() > 2) {
    anchorClass = h.predictClass(x);
    return h.oneVsRest(anchorClass);
  }
  return h;
}

std::string BenchmarkRow::key() const {
  return instanceId + "|" + std::to_string(k) + "|" + std::to_string(m) + "|" + toString(variant);
}

std::string formatMeanStd(double mean, double std) { return fixed(mean, 2) + " (±" + fixed(std, 2) + ")"; }

BenchmarkConfig BenchmarkConfig::fromKeyValue(const KeyValueConfig& kv) {
  static const std::set<std::string> known = {"name",      "dataset",      "dim",        "oracle",   "k",
                                              "m",         "variants",     "instances",  "eval_samples",
                                              "time_limit", "seed",        "jobs",       "conditioning",
                                              "anchors",   "distribution", "beam_width", "cardinality"};
  for (const auto& [key, value] : kv.entries()) {
    if (!known.count(key)) throw ConfigError("unknown benchmark setting '" + key + "'");
  }
  BenchmarkConfig c;
  try {
    c.name = kv.getOr("name", c.name);
    c.dataset = kv.getOr("dataset", c.dataset);
    c.dim = static_cast<std::size_t>(kv.getInt("dim", 0));
    c.oracle = kv.getOr("oracle", c.oracle);
    c.ks = parseSizes(kv, "k", c.ks);
    c.ms = parseSizes(kv, "m", c.ms);
    if (kv.has("variants")) {
      c.variants.clear();
      for (const auto& v : kv.getList("variants")) c.variants.push_back(parseVariant(v));
      if (c.variants.empty()) throw ConfigError("'variants' must not be empty");
    }
    c.instances = static_cast<std::size_t>(kv.getInt("instances", static_cast<std::int64_t>(c.instances)));
    c.evalSamples = static_cast<std::size_t>(kv.getInt("eval_samples", static_cast<std::int64_t>(c.evalSamples)));
    c.timeLimit = kv.getDouble("time_limit", c.timeLimit);
    c.seed = static_cast<std::uint64_t>(kv.getInt("seed", 0));
    c.jobs = static_cast<std::size_t>(kv.getInt("jobs", 0));
    c.conditioning = parseConditioning(kv.getOr("conditioning", "exact"));
    const std::string anchors = kv.getOr("anchors", "test");
    if (anchors == "test") {
      c.anchors = AnchorSource::kTestSplit;
    } else if (anchors == "distribution") {
      c.anchors = AnchorSource::kDistribution;
    } else {
      throw ConfigError("anchors must be 'test' or 'distribution'");
    }
    const std::string dist = kv.getOr("distribution", "uniform");
    if (dist == "uniform") {
      c.distribution = SamplingDistribution::kUniform;
    } else if (dist == "empirical") {
      c.distribution = SamplingDistribution::kEmpirical;
    } else {
      throw ConfigError("distribution must be 'uniform' or 'empirical'");
    }
    c.beamWidth = static_cast<std::size_t>(kv.getInt("beam_width", 1));
    c.cardinality = parseCardinality(kv.getOr("cardinality", "exact"));
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  if (!(c.timeLimit > 0.0)) throw ConfigError("time_limit must be positive");
  if (c.evalSamples == 0) throw ConfigError("eval_samples must be positive");
  if (c.instances == 0) throw ConfigError("instances must be positive");
  OracleSpec::parse(c.oracle);
  return c;
}

KeyValueConfig BenchmarkConfig::toKeyValue() const {
  KeyValueConfig kv;
  kv.set("name", name);
  kv.set("dataset", dataset);
  kv.set("dim", std::to_string(dim));
  kv.set("oracle", oracle);
  kv.set("k", joinList(ks));
  kv.set("m", joinList(ms));
  kv.set("variants", joinList(variants));
  kv.set("instances", std::to_string(instances));
  kv.set("eval_samples", std::to_string(evalSamples));
  kv.set("time_limit", fixed(timeLimit, 3));
  kv.set("seed", std::to_string(seed));
  kv.set("jobs", std::to_string(jobs));
  kv.set("conditioning", toString(conditioning));
  kv.set("anchors", anchorsName(anchors));
  kv.set("distribution", distributionName(distribution));
  kv.set("beam_width", std::to_string(beamWidth));
  kv.set("cardinality", toString(cardinality));
  return kv;
}

std::string BenchmarkConfig::fingerprint() const {
  std::string s;
  const KeyValueConfig kv = toKeyValue();
  for (const auto& [k, v] : kv.entries()) {
    if (k != "jobs") s += k + "=" + v + ";";
  }
  return s;
}

std::vector<SummaryCell> summarize(const BenchmarkConfig& config, const std::vector<BenchmarkRow>& rows) {
  std::vector<SummaryCell> cells;
  for (auto k : config.ks) {
    for (auto m : config.ms) {
      for (auto v : config.variants) {
        SummaryCell c{k, m, v};
        std::vector<double> vals;
        double secs = 0.0;
        for (const auto& r : rows) {
          if (r.k != k || r.m != m || r.variant != v) continue;
          if (!r.ok) {
            ++c.failed;
            continue;
          }
          vals.push_back(r.precisionError());
          secs += r.seconds;
        }
        c.rows = vals.size();
        if (!vals.empty()) {
          double sum = 0.0;
          for (double x : vals) sum += x;
          c.mean = sum / static_cast<double>(vals.size());
          double ss = 0.0;
          for (double x : vals) ss += (x - c.mean) * (x - c.mean);
          c.std = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
          c.sem = c.std / std::sqrt(static_cast<double>(vals.size()));
          c.meanSeconds = secs / static_cast<double>(vals.size());
        }
        cells.push_back(c);
      }
    }
  }
  return cells;
}

EvalReport runBenchmark(const BenchmarkConfig& cfg, const std::optional<std::string>& outDir) {
  const Setup setup = buildSetup(cfg);

  std::vector<BenchmarkRow> rows;
  for (std::size_t a = 0; a < setup.anchors.size(); ++a) {
    for (auto k : cfg.ks) {
      for (auto m : cfg.ms) {
        for (auto v : cfg.variants) {
          BenchmarkRow r;
          r.anchorIndex = a;
          r.instanceId = setup.anchorIds[a];
          r.k = k;
          r.m = m;
          r.variant = v;
          rows.push_back(std::move(r));
        }
      }
    }
  }

  std::map<std::string, BenchmarkRow> done;
  std::ofstream checkpoint, events;
  if (outDir) {
    fs::create_directories(*outDir);
    const fs::path cp = fs::path(*outDir) / "checkpoint.jsonl";
    if (fs::exists(cp)) {
      std::ifstream in(cp);
      std::string line;
      bool first = true;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
          continue;  // torn final line of an interrupted run
        }
        if (first) {
          if (j.value("fingerprint", "") != cfg.fingerprint()) {
            throw ConfigError("checkpoint in " + *outDir + " belongs to a different configuration");
          }
          first = false;
          continue;
        }
        BenchmarkRow r = rowFromJson(j);
        done[r.key()] = std::move(r);
      }
      checkpoint.open(cp, std::ios::app);
    } else {
      checkpoint.open(cp);
      checkpoint << nlohmann::json{{"fingerprint", cfg.fingerprint()}}.dump() << '\n';
    }
    events.open(fs::path(*outDir) / "events.jsonl", std::ios::app);
    events << nlohmann::json{{"event", "start"},
                             {"rows", rows.size()},
                             {"resumed", done.size()},
                             {"oracle", setup.ctx.oracle->describe()},
                             {"train_accuracy", setup.ctx.trainAccuracy},
                             {"test_accuracy", setup.ctx.testAccuracy},
                             {"constant_model", setup.ctx.constantWarning}}
                  .dump()
           << '\n';
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (auto it = done.find(rows[i].key()); it != done.end()) {
      rows[i] = it->second;
    } else {
      pending.push_back(i);
    }
  }

  std::mutex io;
  const int jobs = cfg.jobs == 0 ? omp_get_num_procs() : static_cast<int>(cfg.jobs);
  const auto n = static_cast<std::ptrdiff_t>(pending.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    BenchmarkRow& row = rows[pending[static_cast<std::size_t>(p)]];
    runRow(cfg, setup, row);
    if (outDir) {
      std::lock_guard<std::mutex> lock(io);
      checkpoint << rowToJson(row).dump() << '\n';
      checkpoint.flush();
      events << nlohmann::json{{"event", "row"},
                               {"key", row.key()},
                               {"status", row.ok ? "ok" : "failed"},
                               {"seconds", row.seconds},
                               {"error", row.error}}
                    .dump()
             << '\n';
      events.flush();
    }
  }

  EvalReport rep;
  rep.name = cfg.name;
  rep.rows = std::move(rows);
  rep.cells = summarize(cfg, rep.rows);
  rep.trainAccuracy = setup.ctx.trainAccuracy;
  rep.testAccuracy = setup.ctx.testAccuracy;
  for (const auto& r : rep.rows) rep.failedRows += r.ok ? 0 : 1;

  if (outDir) {
    const fs::path dir(*outDir);
    std::ostringstream conf;
    conf << "# effective benchmark configuration\n# seed derivation: " << kSeedScheme << '\n';
    const KeyValueConfig effective = cfg.toKeyValue();
    for (const auto& [k, v] : effective.entries()) conf << k << " = " << v << '\n';
    writeFile(dir / "config.txt", conf.str());
    writeFile(dir / "rows.csv", rowsCsv(rep, setup.ctx.dataset ? setup.ctx.dataset->featureNames : std::vector<std::string>{}));
    writeFile(dir / "summary.csv", summaryCsv(rep));
    writeFile(dir / "table.csv", tableCsv(rep));
    writeFile(dir / "timings.csv", timingsCsv(rep));
    events << nlohmann::json{{"event", "end"}, {"failed", rep.failedRows}}.dump() << '\n';
  }
  return rep;
}

}  // namespace ruleseeker
