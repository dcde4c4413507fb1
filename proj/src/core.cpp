#include "ruleseeker/core.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <sstream>

#include "ruleseeker/errors.hpp"

namespace ruleseeker {

FeatureSet normalizeFeatures(FeatureSet features, std::size_t dim) {
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());
  if (!features.empty() && features.back() >= dim) {
    throw ContractViolation("feature index " + std::to_string(features.back()) +
                            " out of range for dimension " + std::to_string(dim));
  }
  return features;
}

FeatureSet parseFeatureList(std::string_view text) {
  FeatureSet out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view tok = text.substr(pos, end - pos);
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
    if (!tok.empty()) {
      std::size_t value = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ContractViolation("bad feature index '" + std::string(tok) + "'");
      }
      out.push_back(value);
    }
    pos = end + 1;
  }
  return out;
}

std::string formatFeatureList(const FeatureSet& features, char sep) {
  std::string out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(features[i]);
  }
  return out;
}

Instance Instance::fromBits(std::span<const int> bits) {
  Instance x(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] != 0 && bits[j] != 1) {
      throw ContractViolation("instance coordinates must be 0 or 1");
    }
    x.set(j, bits[j] == 1);
  }
  return x;
}

Instance Instance::fromString(std::string_view bits) {
  Instance x(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] != '0' && bits[j] != '1') {
      throw ContractViolation("bitstring may contain only '0' and '1'");
    }
    x.set(j, bits[j] == '1');
  }
  return x;
}

Instance Instance::ones(std::size_t dim) {
  Instance x(dim);
  for (auto& w : x.words_) w = ~Word{0};
  if (const std::size_t tail = dim % kWordBits; tail != 0) {
    x.words_.back() = (Word{1} << tail) - 1;
  }
  return x;
}

std::size_t Instance::popcount() const {
  std::size_t n = 0;
  for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string Instance::toString() const {
  std::string s(dim_, '0');
  for (std::size_t j = 0; j < dim_; ++j) {
    if ((*this)[j]) s[j] = '1';
  }
  return s;
}

Instance bitwiseEquivalence(const Instance& a, const Instance& b) {
  if (a.dim() != b.dim()) throw ContractViolation("dimension mismatch in bitwise equivalence");
  Instance out = Instance::ones(a.dim());
  auto ow = out.words();
  auto aw = a.words();
  auto bw = b.words();
  for (std::size_t i = 0; i < ow.size(); ++i) ow[i] &= ~(aw[i] ^ bw[i]);
  return out;
}

std::string PartialInstance::toString() const {
  std::string s(dim(), '*');
  for (std::size_t j = 0; j < dim(); ++j) {
    if (isDefined(j)) s[j] = value(j) ? '1' : '0';
  }
  return s;
}

bool covers(const PartialInstance& p, const Instance& z) {
  if (p.dim() != z.dim()) throw ContractViolation("dimension mismatch in covers");
  auto dw = p.definedMask().words();
  auto vw = p.valueMask().words();
  auto zw = z.words();
  for (std::size_t i = 0; i < zw.size(); ++i) {
    if ((zw[i] ^ vw[i]) & dw[i]) return false;
  }
  return true;
}

PartialInstance restrict(const Instance& x, const FeatureSet& features) {
  PartialInstance p(x.dim());
  for (std::size_t j : features) {
    if (j >= x.dim()) {
      throw ContractViolation("restriction index " + std::to_string(j) + " out of range");
    }
    p.define(j, x[j]);
  }
  return p;
}

void validate(const Explanation& e) {
  if (e.features.size() > e.budget) {
    throw ContractViolation("explanation has more features than its budget");
  }
  for (std::size_t j : e.features) {
    if (j >= e.anchor.dim()) throw ContractViolation("explanation feature out of range");
  }
  if (e.anchorLabel != 0 && e.anchorLabel != 1) throw ContractViolation("label must be 0 or 1");
}

Rule::Rule(std::vector<Literal> body, int head) : body_(std::move(body)), head_(head) {
  if (head_ != 0 && head_ != 1) throw ContractViolation("rule head must be 0 or 1");
}

bool Rule::fires(const Instance& z) const {
  for (const Literal& lit : body_) {
    if (lit.feature >= z.dim()) throw ContractViolation("rule literal out of range");
    if (z[lit.feature] != lit.value) return false;
  }
  return true;
}

std::string Rule::toString() const {
  std::ostringstream os;
  if (body_.empty()) os << "TRUE";
  for (std::size_t i = 0; i < body_.size(); ++i) {
    if (i) os << " AND ";
    os << "X_" << body_[i].feature << " = " << (body_[i].value ? 1 : 0);
  }
  os << " => " << head_;
  return os.str();
}

Rule ruleFromExplanation(const Explanation& e) {
  std::vector<Literal> body;
  body.reserve(e.features.size());
  for (std::size_t j : e.features) body.push_back({j, e.anchor[j]});
  return Rule(std::move(body), e.anchorLabel);
}

MonotoneMonomial::MonotoneMonomial(FeatureSet variables) : variables_(std::move(variables)) {
  std::sort(variables_.begin(), variables_.end());
  variables_.erase(std::unique(variables_.begin(), variables_.end()), variables_.end());
}

bool MonotoneMonomial::evaluate(const Instance& u) const {
  for (std::size_t j : variables_) {
    if (j >= u.dim()) throw ContractViolation("monomial variable out of range");
    if (!u[j]) return false;
  }
  return true;
}

}  // namespace ruleseeker
