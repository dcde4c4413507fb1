#include "ruleseeker/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ruleseeker/errors.hpp"
#include "ruleseeker/kvconfig.hpp"
#include "ruleseeker/random.hpp"

namespace ruleseeker {
namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

bool parseNumber(const std::string& token, double& out) {
  if (token.empty()) return false;
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size() && std::isfinite(out);
}

std::string formatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

RawDataset parseCsv(const std::string& text, const CsvSchema& schema, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = splitCsvLine(line);
    break;
  }
  if (header.empty()) throw LoadError(LoadError::Kind::kUnreadable, origin + ": empty file");

  const auto targetIt = std::find(header.begin(), header.end(), schema.target);
  if (schema.target.empty() || targetIt == header.end()) {
    throw LoadError(LoadError::Kind::kMissingTarget,
                    origin + ": target column '" + schema.target + "' not found in header");
  }
  const std::size_t targetCol = static_cast<std::size_t>(targetIt - header.begin());

  std::vector<std::size_t> featureCols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == targetCol) continue;
    if (std::find(schema.ignore.begin(), schema.ignore.end(), header[c]) != schema.ignore.end()) {
      continue;
    }
    featureCols.push_back(c);
  }

  auto isMissing = [&](const std::string& tok) {
    return std::find(schema.missingMarkers.begin(), schema.missingMarkers.end(), tok) !=
           schema.missingMarkers.end();
  };

  std::vector<std::vector<std::string>> tokens;
  std::vector<std::string> targets;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = splitCsvLine(line);
    if (fields.size() != header.size()) {
      throw LoadError(LoadError::Kind::kRaggedRow,
                      origin + ":" + std::to_string(lineNo) + ": expected " +
                          std::to_string(header.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      lineNo);
    }
    if (isMissing(fields[targetCol])) {
      throw LoadError(LoadError::Kind::kFit,
                      origin + ":" + std::to_string(lineNo) + ": missing target value", lineNo);
    }
    targets.push_back(fields[targetCol]);
    std::vector<std::string> row;
    row.reserve(featureCols.size());
    for (std::size_t c : featureCols) row.push_back(fields[c]);
    tokens.push_back(std::move(row));
  }

  RawDataset ds;
  ds.targetName = schema.target;
  ds.target = std::move(targets);
  for (std::size_t f = 0; f < featureCols.size(); ++f) {
    Column col{header[featureCols[f]], ColumnKind::kNumeric};
    if (auto it = schema.overrides.find(col.name); it != schema.overrides.end()) {
      col.kind = it->second;
    } else {
      for (const auto& row : tokens) {
        double v;
        if (!isMissing(row[f]) && !parseNumber(row[f], v)) {
          col.kind = ColumnKind::kCategorical;
          break;
        }
      }
    }
    ds.columns.push_back(col);
  }
  ds.rows.resize(tokens.size());
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    ds.rows[r].resize(featureCols.size());
    for (std::size_t f = 0; f < featureCols.size(); ++f) {
      Cell& cell = ds.rows[r][f];
      cell.text = tokens[r][f];
      cell.missing = isMissing(cell.text);
      if (!cell.missing && ds.columns[f].kind == ColumnKind::kNumeric &&
          !parseNumber(cell.text, cell.number)) {
        // Forced-numeric column with a non-numeric token.
        cell.missing = true;
      }
    }
  }
  return ds;
}

RawDataset loadCsv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadError::Kind::kUnreadable, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw LoadError(LoadError::Kind::kUnreadable, "error reading " + path);
  return parseCsv(ss.str(), schema, path);
}

BinStrategy parseBinStrategy(const std::string& name) {
  if (name == "quantile") return BinStrategy::kQuantile;
  if (name == "uniform") return BinStrategy::kUniform;
  throw ContractViolation("unknown bin strategy '" + name + "'");
}

std::string toString(BinStrategy s) { return s == BinStrategy::kQuantile ? "quantile" : "uniform"; }

double quantileSorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ContractViolation("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Binarizer::Binarizer(std::vector<AttributeEncoding> attributes, BinStrategy strategy,
                     std::size_t binCount)
    : attributes_(std::move(attributes)), strategy_(strategy), binCount_(binCount) {
  dim_ = 0;
  for (auto& a : attributes_) {
    a.offset = dim_;
    a.width = a.kind == ColumnKind::kNumeric ? a.cuts.size() + 1 : a.categories.size();
    dim_ += a.width;
  }
}

std::vector<std::string> Binarizer::featureNames() const {
  std::vector<std::string> names;
  names.reserve(dim_);
  for (const auto& a : attributes_) {
    if (a.kind == ColumnKind::kCategorical) {
      for (const auto& c : a.categories) names.push_back(a.name + " = " + c);
      continue;
    }
    if (a.cuts.empty()) {
      names.push_back(a.name + " (any)");
      continue;
    }
    names.push_back(a.name + " < " + formatNumber(a.cuts.front()));
    for (std::size_t b = 1; b < a.cuts.size(); ++b) {
      names.push_back(a.name + " in [" + formatNumber(a.cuts[b - 1]) + ", " +
                      formatNumber(a.cuts[b]) + ")");
    }
    names.push_back(a.name + " >= " + formatNumber(a.cuts.back()));
  }
  return names;
}

Instance Binarizer::transformRow(const std::vector<Cell>& row) const {
  if (row.size() != attributes_.size()) {
    throw ContractViolation("row has " + std::to_string(row.size()) + " attributes, binarizer expects " +
                            std::to_string(attributes_.size()));
  }
  Instance x(dim_);
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    const auto& enc = attributes_[a];
    const Cell& cell = row[a];
    if (cell.missing) continue;
    if (enc.kind == ColumnKind::kNumeric) {
      const auto bin = static_cast<std::size_t>(
          std::upper_bound(enc.cuts.begin(), enc.cuts.end(), cell.number) - enc.cuts.begin());
      x.set(enc.offset + bin, true);
    } else {
      auto it = std::lower_bound(enc.categories.begin(), enc.categories.end(), cell.text);
      if (it != enc.categories.end() && *it == cell.text) {
        x.set(enc.offset + static_cast<std::size_t>(it - enc.categories.begin()), true);
      }
    }
  }
  return x;
}

Binarizer fitBinarizer(const RawDataset& ds, std::size_t binCount, BinStrategy strategy,
                       const std::vector<std::size_t>& rows) {
  if (binCount < 2) throw ContractViolation("binCount must be at least 2");
  std::vector<std::size_t> fitRows = rows;
  if (fitRows.empty()) {
    fitRows.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) fitRows[i] = i;
  }
  if (fitRows.empty()) throw LoadError(LoadError::Kind::kFit, "cannot fit binarizer on an empty dataset");

  std::vector<AttributeEncoding> attrs;
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    AttributeEncoding enc;
    enc.name = ds.columns[c].name;
    enc.kind = ds.columns[c].kind;
    if (enc.kind == ColumnKind::kCategorical) {
      std::set<std::string> cats;
      for (std::size_t r : fitRows) {
        if (!ds.rows.at(r)[c].missing) cats.insert(ds.rows[r][c].text);
      }
      enc.categories.assign(cats.begin(), cats.end());
    } else {
      std::vector<double> values;
      for (std::size_t r : fitRows) {
        if (!ds.rows.at(r)[c].missing) values.push_back(ds.rows[r][c].number);
      }
      std::sort(values.begin(), values.end());
      if (!values.empty()) {
        std::vector<double> edges;
        for (std::size_t b = 0; b <= binCount; ++b) {
          const double q = static_cast<double>(b) / static_cast<double>(binCount);
          edges.push_back(strategy == BinStrategy::kQuantile
                              ? quantileSorted(values, q)
                              : values.front() + (values.back() - values.front()) * q);
        }
        // Collapse bins narrower than 1e-8 so edges stay strictly increasing.
        std::vector<double> kept{edges.front()};
        for (std::size_t b = 1; b < edges.size(); ++b) {
          if (edges[b] - kept.back() > 1e-8) kept.push_back(edges[b]);
        }
        if (kept.size() >= 2) enc.cuts.assign(kept.begin() + 1, kept.end() - 1);
      }
    }
    attrs.push_back(std::move(enc));
  }
  return Binarizer(std::move(attrs), strategy, binCount);
}

std::vector<std::size_t> BinaryDataset::trainOrAll() const {
  if (!train.empty()) return train;
  std::vector<std::size_t> all(size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

BinaryDataset binarize(const Binarizer& b, const RawDataset& ds, const std::string& positiveClass) {
  if (ds.columns.size() != b.attributes().size()) {
    throw ContractViolation("dataset schema does not match the binarizer");
  }
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    if (ds.columns[c].name != b.attributes()[c].name || ds.columns[c].kind != b.attributes()[c].kind) {
      throw ContractViolation("column '" + ds.columns[c].name + "' does not match the binarizer");
    }
  }
  BinaryDataset out;
  out.dim = b.outputDimension();
  out.featureNames = b.featureNames();
  std::set<std::string> classes(ds.target.begin(), ds.target.end());
  out.classNames.assign(classes.begin(), classes.end());
  if (!positiveClass.empty() && out.classNames.size() == 2) {
    if (out.classNames[0] == positiveClass) std::swap(out.classNames[0], out.classNames[1]);
  }
  out.instances.reserve(ds.size());
  out.labels.reserve(ds.size());
  for (std::size_t r = 0; r < ds.size(); ++r) {
    out.instances.push_back(b.transformRow(ds.rows[r]));
    const auto it = std::find(out.classNames.begin(), out.classNames.end(), ds.target[r]);
    out.labels.push_back(static_cast<int>(it - out.classNames.begin()));
  }
  return out;
}

Split makeSplit(std::size_t n, double testRatio, std::uint64_t seed) {
  if (testRatio < 0.0 || testRatio >= 1.0) throw ContractViolation("test ratio must be in [0,1)");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  const auto nTest = static_cast<std::size_t>(std::llround(static_cast<double>(n) * testRatio));
  Split s;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(nTest));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(nTest), perm.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

Manifest loadManifest(const std::string& path) {
  KeyValueConfig kv;
  try {
    kv = KeyValueConfig::load(path);
  } catch (const ConfigError& e) {
    throw LoadError(LoadError::Kind::kBadManifest, e.what());
  }
  Manifest m;
  const auto csv = kv.get("csv");
  const auto target = kv.get("target");
  if (!csv) throw LoadError(LoadError::Kind::kBadManifest, path + ": manifest lacks 'csv'");
  if (!target) throw LoadError(LoadError::Kind::kMissingTarget, path + ": manifest lacks 'target'");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  m.csvPath = std::filesystem::path(*csv).is_absolute() ? *csv : (base / *csv).string();
  m.name = kv.getOr("name", std::filesystem::path(*csv).stem().string());
  m.schema.target = *target;
  for (const auto& c : kv.getList("numeric")) m.schema.overrides[c] = ColumnKind::kNumeric;
  for (const auto& c : kv.getList("categorical")) m.schema.overrides[c] = ColumnKind::kCategorical;
  m.schema.ignore = kv.getList("ignore");
  if (kv.has("missing")) m.schema.missingMarkers = kv.getList("missing");
  try {
    m.binCount = static_cast<std::size_t>(kv.getInt("bins", 3));
    m.strategy = parseBinStrategy(kv.getOr("strategy", "quantile"));
    m.splitSeed = static_cast<std::uint64_t>(kv.getInt("split_seed", 1));
    m.testRatio = kv.getDouble("test_ratio", 0.25);
  } catch (const std::exception& e) {
    throw LoadError(LoadError::Kind::kBadManifest, e.what());
  }
  m.positiveClass = kv.getOr("positive_class", "");
  return m;
}

PreparedDataset prepareDataset(const Manifest& manifest) {
  PreparedDataset p;
  p.manifest = manifest;
  RawDataset raw = loadCsv(manifest.csvPath, manifest.schema);
  if (raw.size() == 0) throw LoadError(LoadError::Kind::kFit, manifest.csvPath + ": no data rows");
  Split split = makeSplit(raw.size(), manifest.testRatio, manifest.splitSeed);
  p.binarizer = fitBinarizer(raw, manifest.binCount, manifest.strategy, split.train);
  p.data = binarize(p.binarizer, raw, manifest.positiveClass);
  p.data.train = std::move(split.train);
  p.data.test = std::move(split.test);
  return p;
}

void writeArtifacts(const PreparedDataset& prepared, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const BinaryDataset& d = prepared.data;
  {
    std::ofstream out(fs::path(dir) / "dataset.txt", std::ios::binary);
    out << "ruleseeker-binary v1\n" << d.dim << ' ' << d.size() << ' ' << d.numClasses() << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
      out << d.instances[i].toString() << ' ' << d.labels[i] << '\n';
    }
  }
  {
    nlohmann::ordered_json j;
    j["name"] = prepared.manifest.name;
    j["target"] = prepared.manifest.schema.target;
    j["strategy"] = toString(prepared.binarizer.strategy());
    j["bins"] = prepared.binarizer.binCount();
    j["dimension"] = d.dim;
    j["classes"] = d.classNames;
    auto attrs = nlohmann::ordered_json::array();
    for (const auto& a : prepared.binarizer.attributes()) {
      nlohmann::ordered_json ja;
      ja["name"] = a.name;
      ja["kind"] = a.kind == ColumnKind::kNumeric ? "numeric" : "categorical";
      ja["offset"] = a.offset;
      ja["width"] = a.width;
      if (a.kind == ColumnKind::kNumeric) {
        ja["cuts"] = a.cuts;
      } else {
        ja["categories"] = a.categories;
      }
      attrs.push_back(std::move(ja));
    }
    j["attributes"] = std::move(attrs);
    j["features"] = d.featureNames;
    std::ofstream out(fs::path(dir) / "binarizer.json", std::ios::binary);
    out << j.dump(2) << '\n';
  }
  {
    std::ofstream out(fs::path(dir) / "split.txt", std::ios::binary);
    out << "train";
    for (std::size_t i : d.train) out << ' ' << i;
    out << "\ntest";
    for (std::size_t i : d.test) out << ' ' << i;
    out << '\n';
  }
}

BinaryDataset readArtifacts(const std::string& dir) {
  namespace fs = std::filesystem;
  BinaryDataset d;
  const fs::path dataPath = fs::path(dir) / "dataset.txt";
  std::ifstream in(dataPath);
  if (!in) throw LoadError(LoadError::Kind::kUnreadable, "cannot open " + dataPath.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != "ruleseeker-binary v1") {
    throw LoadError(LoadError::Kind::kUnreadable, dataPath.string() + ": not a binary dataset file", 1);
  }
  std::size_t n = 0, classes = 0;
  if (!(in >> d.dim >> n >> classes)) {
    throw LoadError(LoadError::Kind::kUnreadable, dataPath.string() + ": bad header", 2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::string bits;
    int label = 0;
    if (!(in >> bits >> label) || bits.size() != d.dim || label < 0 ||
        static_cast<std::size_t>(label) >= classes) {
      throw LoadError(LoadError::Kind::kRaggedRow, dataPath.string() + ": bad row", i + 3);
    }
    d.instances.push_back(Instance::fromString(bits));
    d.labels.push_back(label);
  }

  const fs::path metaPath = fs::path(dir) / "binarizer.json";
  std::ifstream meta(metaPath);
  if (meta) {
    try {
      const auto j = nlohmann::json::parse(meta);
      d.classNames = j.at("classes").get<std::vector<std::string>>();
      d.featureNames = j.at("features").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(LoadError::Kind::kUnreadable, metaPath.string() + ": " + e.what());
    }
  }
  if (d.classNames.size() != classes) {
    d.classNames.clear();
    for (std::size_t c = 0; c < classes; ++c) d.classNames.push_back(std::to_string(c));
  }
  if (d.featureNames.size() != d.dim) d.featureNames.clear();

  std::ifstream split(fs::path(dir) / "split.txt");
  std::string line;
  while (std::getline(split, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    auto& target = tag == "train" ? d.train : d.test;
    std::size_t idx;
    while (ls >> idx) {
      if (idx >= n) throw LoadError(LoadError::Kind::kUnreadable, "split index out of range");
      target.push_back(idx);
    }
  }
  return d;
}

}  // namespace ruleseeker
