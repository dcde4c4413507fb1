#pragma once

// Domain types shared by every module: binary instances, partial instances,
// rules, monotone monomials and explanations.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ruleseeker {

using FeatureSet = std::vector<std::size_t>;

// Sorts and deduplicates; throws ContractViolation if an index is >= dim.
FeatureSet normalizeFeatures(FeatureSet features, std::size_t dim);

// Parses "0,2,5" (whitespace tolerated, empty string = empty set).
FeatureSet parseFeatureList(std::string_view text);
std::string formatFeatureList(const FeatureSet& features, char sep = ',');

// Fixed-length vector over {0,1}, packed 64 bits per word. Bits beyond dim()
// in the last word are always zero.
class Instance {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Instance() = default;
  explicit Instance(std::size_t dim) : dim_(dim), words_(wordCount(dim), 0) {}

  static Instance fromBits(std::span<const int> bits);
  // Accepts "0110"; any other character is a ContractViolation.
  static Instance fromString(std::string_view bits);
  static Instance ones(std::size_t dim);

  std::size_t dim() const { return dim_; }
  bool operator[](std::size_t j) const {
    return (words_[j / kWordBits] >> (j % kWordBits)) & 1u;
  }
  void set(std::size_t j, bool value) {
    const Word mask = Word{1} << (j % kWordBits);
    if (value) {
      words_[j / kWordBits] |= mask;
    } else {
      words_[j / kWordBits] &= ~mask;
    }
  }

  std::span<const Word> words() const { return words_; }
  std::span<Word> words() { return words_; }
  std::size_t popcount() const;
  std::string toString() const;

  auto operator<=>(const Instance&) const = default;
  bool operator==(const Instance&) const = default;

  static std::size_t wordCount(std::size_t dim) { return (dim + kWordBits - 1) / kWordBits; }

 private:
  std::size_t dim_ = 0;
  std::vector<Word> words_;
};

// Coordinatewise equality indicator: result[j] = 1 iff a[j] == b[j].
Instance bitwiseEquivalence(const Instance& a, const Instance& b);

struct LabeledSample {
  Instance instance;
  int label = 0;

  bool operator==(const LabeledSample&) const = default;
};

// Vector over {0, 1, *}: a defined mask and a value mask (value bits outside
// the defined mask are zero).
class PartialInstance {
 public:
  explicit PartialInstance(std::size_t dim) : defined_(dim), values_(dim) {}

  std::size_t dim() const { return defined_.dim(); }
  bool isDefined(std::size_t j) const { return defined_[j]; }
  bool value(std::size_t j) const { return values_[j]; }
  void define(std::size_t j, bool value) {
    defined_.set(j, true);
    values_.set(j, value);
  }

  const Instance& definedMask() const { return defined_; }
  const Instance& valueMask() const { return values_; }

  // "1*0" style rendering.
  std::string toString() const;

  bool operator==(const PartialInstance&) const = default;

 private:
  Instance defined_;
  Instance values_;
};

// True iff every defined coordinate of p equals the matching coordinate of z.
bool covers(const PartialInstance& p, const Instance& z);

PartialInstance restrict(const Instance& x, const FeatureSet& features);

struct Literal {
  std::size_t feature = 0;
  bool value = false;

  bool operator==(const Literal&) const = default;
};

struct SolveStats {
  double elapsedSeconds = 0.0;
  std::uint64_t nodesExplored = 0;
  std::string encoding;
};

struct Explanation {
  FeatureSet features;
  std::size_t budget = 0;
  Instance anchor;
  int anchorLabel = 0;
  std::uint64_t objective = 0;
  bool optimal = false;
  SolveStats solveStats;
};

// Throws ContractViolation if |features| > budget or an index is out of range.
void validate(const Explanation& e);

// IF-THEN rule: predicts head when every body literal holds, 1 - head otherwise.
class Rule {
 public:
  Rule(std::vector<Literal> body, int head);

  const std::vector<Literal>& body() const { return body_; }
  int head() const { return head_; }

  bool fires(const Instance& z) const;
  int predict(const Instance& z) const { return fires(z) ? head_ : 1 - head_; }

  // Literal-by-literal rendering, e.g. "X_0 = 1 AND X_3 = 0 => 1".
  std::string toString() const;

 private:
  std::vector<Literal> body_;
  int head_;
};

// Body {(j, anchor[j]) : j in S}, head = anchorLabel. O(|S|).
Rule ruleFromExplanation(const Explanation& e);

class MonotoneMonomial {
 public:
  MonotoneMonomial() = default;
  explicit MonotoneMonomial(FeatureSet variables);

  const FeatureSet& variables() const { return variables_; }
  // 1 iff u[j] == 1 for every variable; the empty monomial is constant 1.
  bool evaluate(const Instance& u) const;

 private:
  FeatureSet variables_;
};

}  // namespace ruleseeker
