#include <algorithm>
#include <cmath>

#include "ruleseeker/blackbox.hpp"
#include "ruleseeker/errors.hpp"

namespace ruleseeker {
namespace {

void fillUniform(Instance& z, Rng& rng) {
  auto w = z.words();
  for (auto& word : w) word = rng.next();
  if (const std::size_t tail = z.dim() % Instance::kWordBits; tail != 0 && !w.empty()) {
    w.back() &= (Instance::Word{1} << tail) - 1;
  }
}

// Overwrites the defined coordinates of `fixed` into z.
void applyFixed(Instance& z, const PartialInstance& fixed) {
  auto zw = z.words();
  auto dw = fixed.definedMask().words();
  auto vw = fixed.valueMask().words();
  for (std::size_t i = 0; i < zw.size(); ++i) zw[i] = (zw[i] & ~dw[i]) | vw[i];
}

// Distance drawn with P(i) proportional to C(n, i), i = 0..radius.
std::size_t ballDistance(std::size_t n, std::size_t radius, Rng& rng) {
  radius = std::min(radius, n);
  std::vector<double> logw(radius + 1);
  for (std::size_t i = 0; i <= radius; ++i) {
    logw[i] = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(i) + 1) -
              std::lgamma(static_cast<double>(n - i) + 1);
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (auto& v : logw) total += (v = std::exp(v - mx));
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i <= radius; ++i) {
    if (u < logw[i]) return i;
    u -= logw[i];
  }
  return radius;
}

// Flips `count` distinct positions drawn uniformly from `free`.
void flipRandom(Instance& z, std::vector<std::size_t> free, std::size_t count, Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pick = i + rng.below(free.size() - i);
    std::swap(free[i], free[pick]);
    z.set(free[i], !z[free[i]]);
  }
}

}  // namespace

Distribution Distribution::uniform(std::size_t dim, std::uint64_t seed) {
  Distribution d;
  d.kind_ = Kind::kUniform;
  d.dim_ = dim;
  d.seed_ = seed;
  return d;
}

Distribution Distribution::productBernoulli(std::vector<double> p, std::uint64_t seed) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation("Bernoulli parameters must lie in [0,1]");
  }
  Distribution d;
  d.kind_ = Kind::kProductBernoulli;
  d.dim_ = p.size();
  d.seed_ = seed;
  d.p_ = std::move(p);
  return d;
}

Distribution Distribution::empirical(std::vector<Instance> rows, std::uint64_t seed) {
  if (rows.empty()) throw ContractViolation("empirical distribution needs at least one row");
  Distribution d;
  d.kind_ = Kind::kEmpirical;
  d.dim_ = rows.front().dim();
  for (const auto& r : rows) {
    if (r.dim() != d.dim_) throw ContractViolation("empirical rows differ in dimension");
  }
  d.seed_ = seed;
  d.rows_ = std::make_shared<const std::vector<Instance>>(std::move(rows));
  return d;
}

Distribution Distribution::hammingBall(Instance center, std::size_t radius, std::uint64_t seed) {
  Distribution d;
  d.kind_ = Kind::kHammingBall;
  d.dim_ = center.dim();
  d.seed_ = seed;
  d.center_ = std::move(center);
  d.radius_ = radius;
  return d;
}

Distribution Distribution::withSeed(std::uint64_t seed) const {
  Distribution d = *this;
  d.seed_ = seed;
  return d;
}

std::string Distribution::describe() const {
  switch (kind_) {
    case Kind::kUniform:
      return "uniform";
    case Kind::kProductBernoulli:
      return "product-bernoulli";
    case Kind::kEmpirical:
      return "empirical(" + std::to_string(rows_->size()) + " rows)";
    case Kind::kHammingBall:
      return "hamming-ball(radius " + std::to_string(radius_) + ")";
  }
  return "?";
}

Instance Distribution::sample(Rng& rng) const {
  Instance z(dim_);
  switch (kind_) {
    case Kind::kUniform:
      fillUniform(z, rng);
      break;
    case Kind::kProductBernoulli:
      for (std::size_t j = 0; j < dim_; ++j) z.set(j, rng.bernoulli(p_[j]));
      break;
    case Kind::kEmpirical:
      z = (*rows_)[rng.below(rows_->size())];
      break;
    case Kind::kHammingBall: {
      z = center_;
      std::vector<std::size_t> all(dim_);
      for (std::size_t j = 0; j < dim_; ++j) all[j] = j;
      flipRandom(z, std::move(all), ballDistance(dim_, radius_, rng), rng);
      break;
    }
  }
  return z;
}

Instance Distribution::sampleConditioned(Rng& rng, const PartialInstance& fixed,
                                         std::size_t& attemptBudget) const {
  switch (kind_) {
    case Kind::kUniform:
    case Kind::kProductBernoulli: {
      Instance z = sample(rng);
      applyFixed(z, fixed);
      return z;
    }
    case Kind::kEmpirical: {
      while (attemptBudget > 0) {
        --attemptBudget;
        const Instance& z = (*rows_)[rng.below(rows_->size())];
        if (covers(fixed, z)) return z;
      }
      const auto covered = static_cast<std::size_t>(
          std::count_if(rows_->begin(), rows_->end(), [&](const Instance& z) { return covers(fixed, z); }));
      throw ConditioningInfeasible("rejection budget exhausted (" + std::to_string(covered) + " of " +
                                       std::to_string(rows_->size()) + " rows covered)",
                                   covered);
    }
    case Kind::kHammingBall: {
      std::size_t used = 0;
      std::vector<std::size_t> free;
      for (std::size_t j = 0; j < dim_; ++j) {
        if (fixed.isDefined(j)) {
          used += fixed.value(j) != center_[j];
        } else {
          free.push_back(j);
        }
      }
      if (used > radius_) {
        throw ConditioningInfeasible("fixed coordinates lie outside the Hamming ball", 0);
      }
      Instance z = center_;
      applyFixed(z, fixed);
      const std::size_t flips = ballDistance(free.size(), radius_ - used, rng);
      flipRandom(z, std::move(free), flips, rng);
      return z;
    }
  }
  return Instance(dim_);
}

std::vector<LabeledSample> sampleOracle(const OracleHandle& h, const Distribution& dist, std::size_t m, Rng& rng) {
  if (dist.dim() != h.dim()) throw ContractViolation("distribution and oracle dimensions differ");
  std::vector<Instance> batch;
  batch.reserve(m);
  for (std::size_t i = 0; i < m; ++i) batch.push_back(dist.sample(rng));
  const std::vector<int> labels = h.predict(batch);
  std::vector<LabeledSample> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back({std::move(batch[i]), labels[i]});
  return out;
}

std::vector<LabeledSample> sampleOracle(const OracleHandle& h, const Distribution& dist, std::size_t m) {
  Rng rng(dist.seed());
  return sampleOracle(h, dist, m, rng);
}

std::vector<LabeledSample> sampleConditioned(const OracleHandle& h, const Distribution& dist, const Instance& x,
                                             const FeatureSet& features, std::size_t m, Rng& rng) {
  if (x.dim() != h.dim() || dist.dim() != h.dim()) {
    throw ContractViolation("anchor, distribution and oracle dimensions differ");
  }
  const PartialInstance fixed = restrict(x, normalizeFeatures(features, x.dim()));
  std::vector<Instance> batch;
  batch.reserve(m);
  std::size_t budget = kRejectionRetryFactor * m;
  for (std::size_t i = 0; i < m; ++i) batch.push_back(dist.sampleConditioned(rng, fixed, budget));
  const std::vector<int> labels = h.predict(batch);
  std::vector<LabeledSample> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back({std::move(batch[i]), labels[i]});
  return out;
}

std::vector<LabeledSample> sampleConditioned(const OracleHandle& h, const Distribution& dist, const Instance& x,
                                             const FeatureSet& features, std::size_t m) {
  Rng rng(dist.seed());
  return sampleConditioned(h, dist, x, features, m, rng);
}

}  // namespace ruleseeker
