#pragma once

// Tabular ingest and K-bins / one-hot binarization into interpretable
// binary features.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ruleseeker/core.hpp"

namespace ruleseeker {

enum class ColumnKind { kNumeric, kCategorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;

  bool operator==(const Column&) const = default;
};

struct Cell {
  bool missing = false;
  double number = 0.0;  // valid for numeric columns
  std::string text;     // raw token
};

struct CsvSchema {
  std::string target;
  std::map<std::string, ColumnKind> overrides;
  std::vector<std::string> ignore;
  std::vector<std::string> missingMarkers = {"", "NA", "N/A", "?", "nan", "NaN"};
};

// Feature columns exclude the target; target values are kept as raw text.
struct RawDataset {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::string targetName;
  std::vector<std::string> target;

  std::size_t size() const { return rows.size(); }
};

RawDataset loadCsv(const std::string& path, const CsvSchema& schema);
RawDataset parseCsv(const std::string& text, const CsvSchema& schema,
                    const std::string& origin = "<string>");

enum class BinStrategy { kQuantile, kUniform };

BinStrategy parseBinStrategy(const std::string& name);
std::string toString(BinStrategy s);

struct AttributeEncoding {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<double> cuts;             // numeric: strictly increasing interior cut points
  std::vector<std::string> categories;  // categorical: sorted observed categories
  std::size_t offset = 0;               // first output coordinate of the block
  std::size_t width = 0;                // block size (bins or categories)
};

class Binarizer {
 public:
  Binarizer() = default;
  Binarizer(std::vector<AttributeEncoding> attributes, BinStrategy strategy, std::size_t binCount);

  const std::vector<AttributeEncoding>& attributes() const { return attributes_; }
  std::size_t outputDimension() const { return dim_; }
  BinStrategy strategy() const { return strategy_; }
  std::size_t binCount() const { return binCount_; }
  std::vector<std::string> featureNames() const;

  // One-hot per attribute; missing or unseen values give an all-zero block and
  // out-of-range numbers clamp to the edge bins.
  Instance transformRow(const std::vector<Cell>& row) const;

 private:
  std::vector<AttributeEncoding> attributes_;
  BinStrategy strategy_ = BinStrategy::kQuantile;
  std::size_t binCount_ = 3;
  std::size_t dim_ = 0;
};

// Fits on `rows` only (all rows when empty). Attributes with fewer distinct
// values than binCount silently get fewer bins.
Binarizer fitBinarizer(const RawDataset& ds, std::size_t binCount,
                       BinStrategy strategy = BinStrategy::kQuantile,
                       const std::vector<std::size_t>& rows = {});

// Linear-interpolated quantile of sorted values (numpy "linear" method).
double quantileSorted(const std::vector<double>& sorted, double q);

struct BinaryDataset {
  std::size_t dim = 0;
  std::vector<Instance> instances;
  std::vector<int> labels;              // class index into classNames
  std::vector<std::string> classNames;  // index order
  std::vector<std::string> featureNames;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  std::size_t size() const { return instances.size(); }
  std::size_t numClasses() const { return classNames.size(); }
  std::vector<std::size_t> trainOrAll() const;
};

// Class order is sorted by name, except that `positiveClass` (if given and
// present) is forced to index 1 of a two-class target.
BinaryDataset binarize(const Binarizer& b, const RawDataset& ds,
                       const std::string& positiveClass = "");

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle; test gets round(n * testRatio) rows. Both lists sorted.
Split makeSplit(std::size_t n, double testRatio, std::uint64_t seed);

struct Manifest {
  std::string name;
  std::string csvPath;  // resolved relative to the manifest file
  CsvSchema schema;
  std::size_t binCount = 3;
  BinStrategy strategy = BinStrategy::kQuantile;
  std::uint64_t splitSeed = 1;
  double testRatio = 0.25;
  std::string positiveClass;
};

Manifest loadManifest(const std::string& path);

struct PreparedDataset {
  Manifest manifest;
  Binarizer binarizer;
  BinaryDataset data;
};

PreparedDataset prepareDataset(const Manifest& manifest);

// Artifact directory layout written by `prepare` and read back by every
// other subcommand: dataset.txt, binarizer.json, split.txt.
void writeArtifacts(const PreparedDataset& prepared, const std::string& dir);
BinaryDataset readArtifacts(const std::string& dir);

}  // namespace ruleseeker
