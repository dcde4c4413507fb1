#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ruleseeker/blackbox.hpp"
#include "ruleseeker/errors.hpp"
#include "ruleseeker/kvconfig.hpp"

namespace ruleseeker {

std::string ConstantModel::describe() const { return "constant:" + std::to_string(label_); }

MonomialModel::MonomialModel(std::size_t dim, FeatureSet variables)
    : dim_(dim), monomial_(normalizeFeatures(std::move(variables), dim)) {}

std::string MonomialModel::describe() const {
  return "monomial:" + formatFeatureList(monomial_.variables());
}

ParityModel::ParityModel(std::size_t dim, FeatureSet variables) : dim_(dim), mask_(dim) {
  variables = normalizeFeatures(std::move(variables), dim);
  if (variables.empty()) {
    mask_ = Instance::ones(dim);
  } else {
    for (std::size_t j : variables) mask_.set(j, true);
  }
}

int ParityModel::predictClass(const Instance& z) const {
  auto zw = z.words();
  auto mw = mask_.words();
  unsigned bits = 0;
  for (std::size_t i = 0; i < zw.size(); ++i) bits ^= static_cast<unsigned>(std::popcount(zw[i] & mw[i]));
  return static_cast<int>(bits & 1u);
}

std::string ParityModel::describe() const { return "parity"; }

DictatorModel::DictatorModel(std::size_t dim, std::size_t feature) : dim_(dim), feature_(feature) {
  if (feature >= dim) throw ContractViolation("dictator feature out of range");
}

std::string DictatorModel::describe() const { return "dictator:" + std::to_string(feature_); }

LinearModel::LinearModel(std::size_t dim, std::vector<std::vector<double>> weights, std::vector<double> bias)
    : dim_(dim), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.empty() || weights_.size() != bias_.size()) throw ContractViolation("bad linear model shape");
}

int LinearModel::numClasses() const {
  return weights_.size() == 1 ? 2 : static_cast<int>(weights_.size());
}

int LinearModel::predictClass(const Instance& z) const {
  auto score = [&](std::size_t c) {
    double s = bias_[c];
    for (std::size_t j = 0; j < dim_; ++j) {
      if (z[j]) s += weights_[c][j];
    }
    return s;
  };
  if (weights_.size() == 1) return score(0) > 0.0 ? 1 : 0;
  std::size_t best = 0;
  double bestScore = score(0);
  for (std::size_t c = 1; c < weights_.size(); ++c) {
    const double s = score(c);
    if (s > bestScore) {
      bestScore = s;
      best = c;
    }
  }
  return static_cast<int>(best);
}

std::string LinearModel::describe() const { return "logistic"; }

MlpModel::MlpModel(std::size_t dim, int numClasses, std::vector<Layer> layers)
    : dim_(dim), classes_(numClasses), layers_(std::move(layers)) {}

std::vector<double> MlpModel::logits(const Instance& z) const {
  std::vector<double> act(dim_);
  for (std::size_t j = 0; j < dim_; ++j) act[j] = z[j] ? 1.0 : 0.0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    std::vector<double> next(layer.b);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = &layer.w[o * layer.in];
      double s = 0.0;
      for (std::size_t i = 0; i < layer.in; ++i) s += row[i] * act[i];
      next[o] += s;
      if (l + 1 < layers_.size()) next[o] = std::max(0.0, next[o]);
    }
    act = std::move(next);
  }
  return act;
}

int MlpModel::predictClass(const Instance& z) const {
  const auto out = logits(z);
  return static_cast<int>(std::max_element(out.begin(), out.end()) - out.begin());
}

std::string MlpModel::describe() const {
  std::string s = "mlp:";
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    if (l) s += ',';
    s += std::to_string(layers_[l].out);
  }
  return s;
}

TreeModel::TreeModel(std::size_t dim, int numClasses, std::vector<Node> nodes)
    : dim_(dim), classes_(numClasses), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ContractViolation("tree needs at least one node");
}

int TreeModel::predictClass(const Instance& z) const {
  int n = 0;
  while (nodes_[n].feature >= 0) {
    n = z[static_cast<std::size_t>(nodes_[n].feature)] ? nodes_[n].one : nodes_[n].zero;
  }
  return nodes_[n].label;
}

std::size_t TreeModel::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (nodes_[n].feature >= 0) {
      d[nodes_[n].zero] = d[n] + 1;
      d[nodes_[n].one] = d[n] + 1;
    }
    best = std::max(best, d[n]);
  }
  return best;
}

std::string TreeModel::describe() const { return "tree:" + std::to_string(depth()); }

std::shared_ptr<TreeModel> makeRandomTree(std::size_t dim, std::size_t depth, Rng& rng) {
  depth = std::min(depth, dim);
  std::vector<TreeModel::Node> nodes;
  std::vector<std::size_t> leaves;
  // Children are always appended after their parent, which depth() relies on.
  auto build = [&](auto&& self, std::size_t level, std::vector<std::size_t>& used) -> int {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (level == depth) {
      nodes[id].label = rng.bernoulli(0.5) ? 1 : 0;
      leaves.push_back(static_cast<std::size_t>(id));
      return id;
    }
    std::size_t feature;
    do {
      feature = rng.below(dim);
    } while (std::find(used.begin(), used.end(), feature) != used.end());
    used.push_back(feature);
    nodes[id].feature = static_cast<int>(feature);
    const int zero = self(self, level + 1, used);
    const int one = self(self, level + 1, used);
    nodes[id].zero = zero;
    nodes[id].one = one;
    used.pop_back();
    return id;
  };
  std::vector<std::size_t> used;
  build(build, 0, used);
  if (leaves.size() > 1) {
    bool mixed = false;
    for (std::size_t l : leaves) mixed |= nodes[l].label != nodes[leaves[0]].label;
    if (!mixed) {
      auto& leaf = nodes[leaves[rng.below(leaves.size())]];
      leaf.label = 1 - leaf.label;
    }
  }
  return std::make_shared<TreeModel>(dim, 2, std::move(nodes));
}

ModelSpec ModelSpec::parse(const std::string& text) {
  ModelSpec s;
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  const std::string args = colon == std::string::npos ? "" : trim(text.substr(colon + 1));
  auto toSize = [&](const std::string& v) -> std::size_t {
    try {
      std::size_t used = 0;
      const unsigned long long out = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<std::size_t>(out);
    } catch (const std::exception&) {
      throw ContractViolation("bad model spec argument '" + v + "' in '" + text + "'");
    }
  };
  if (kind == "logistic") {
    s.kind = Kind::kLogistic;
  } else if (kind == "mlp") {
    s.kind = Kind::kMlp;
    if (!args.empty()) {
      s.hidden.clear();
      for (const auto& h : splitList(args)) s.hidden.push_back(toSize(h));
    }
  } else if (kind == "tree" || kind == "random-tree") {
    s.kind = kind == "tree" ? Kind::kTree : Kind::kRandomTree;
    if (!args.empty()) s.depth = toSize(args);
  } else if (kind == "constant") {
    s.kind = Kind::kConstant;
    s.constant = args.empty() ? 1 : static_cast<int>(toSize(args));
    if (s.constant > 1) throw ContractViolation("constant model label must be 0 or 1");
  } else if (kind == "monomial") {
    s.kind = Kind::kMonomial;
    s.features = parseFeatureList(args);
  } else if (kind == "parity") {
    s.kind = Kind::kParity;
    s.features = parseFeatureList(args);
  } else if (kind == "dictator") {
    s.kind = Kind::kDictator;
    s.feature = args.empty() ? 0 : toSize(args);
  } else {
    throw ContractViolation("unknown model kind '" + kind + "'");
  }
  return s;
}

std::string ModelSpec::toString() const {
  switch (kind) {
    case Kind::kLogistic:
      return "logistic";
    case Kind::kMlp: {
      std::string s = "mlp:";
      for (std::size_t i = 0; i < hidden.size(); ++i) s += (i ? "," : "") + std::to_string(hidden[i]);
      return s;
    }
    case Kind::kTree:
      return "tree:" + std::to_string(depth);
    case Kind::kRandomTree:
      return "random-tree:" + std::to_string(depth);
    case Kind::kConstant:
      return "constant:" + std::to_string(constant);
    case Kind::kMonomial:
      return "monomial:" + formatFeatureList(features);
    case Kind::kParity:
      return features.empty() ? "parity" : "parity:" + formatFeatureList(features);
    case Kind::kDictator:
      return "dictator:" + std::to_string(feature);
  }
  return "?";
}

bool ModelSpec::needsTraining() const {
  return kind == Kind::kLogistic || kind == Kind::kMlp || kind == Kind::kTree;
}

std::shared_ptr<const Classifier> makeFixedModel(std::size_t dim, const ModelSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelSpec::Kind::kConstant:
      return std::make_shared<ConstantModel>(dim, spec.constant);
    case ModelSpec::Kind::kMonomial:
      return std::make_shared<MonomialModel>(dim, spec.features);
    case ModelSpec::Kind::kParity:
      return std::make_shared<ParityModel>(dim, spec.features);
    case ModelSpec::Kind::kDictator:
      return std::make_shared<DictatorModel>(dim, spec.feature);
    case ModelSpec::Kind::kRandomTree: {
      Rng rng(seed);
      return makeRandomTree(dim, spec.depth, rng);
    }
    default:
      throw ContractViolation("model '" + spec.toString() + "' needs a training set");
  }
}

double accuracy(const Classifier& model, const BinaryDataset& ds, const std::vector<std::size_t>& rows) {
  if (rows.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t r : rows) correct += model.predictClass(ds.instances[r]) == ds.labels[r];
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

namespace {

std::vector<double> denseRow(const Instance& x) {
  std::vector<double> v(x.dim());
  for (std::size_t j = 0; j < x.dim(); ++j) v[j] = x[j] ? 1.0 : 0.0;
  return v;
}

// Full-batch gradient descent on L2-regularized logistic loss.
void fitLogistic(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                 std::vector<double>& w, double& b) {
  constexpr int kIterations = 2000;
  constexpr double kRate = 0.5;
  constexpr double kL2 = 1e-4;
  const std::size_t n = X.size();
  const std::size_t d = w.size();
  std::vector<double> grad(d);
  for (int it = 0; it < kIterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = b;
      for (std::size_t j = 0; j < d; ++j) s += w[j] * X[i][j];
      const double p = 1.0 / (1.0 + std::exp(-s));
      const double err = p - y[i];
      for (std::size_t j = 0; j < d; ++j) grad[j] += err * X[i][j];
      gb += err;
    }
    const double scale = kRate / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) w[j] -= scale * grad[j] + kRate * kL2 * w[j];
    b -= scale * gb;
  }
}

std::shared_ptr<const Classifier> trainLogistic(const BinaryDataset& ds, const std::vector<std::size_t>& rows,
                                                int classes) {
  std::vector<std::vector<double>> X;
  for (std::size_t r : rows) X.push_back(denseRow(ds.instances[r]));
  const int heads = classes == 2 ? 1 : classes;
  std::vector<std::vector<double>> weights(heads, std::vector<double>(ds.dim, 0.0));
  std::vector<double> bias(heads, 0.0);
  for (int c = 0; c < heads; ++c) {
    const int positive = classes == 2 ? 1 : c;
    std::vector<int> y;
    for (std::size_t r : rows) y.push_back(ds.labels[r] == positive ? 1 : 0);
    fitLogistic(X, y, weights[c], bias[c]);
  }
  return std::make_shared<LinearModel>(ds.dim, std::move(weights), std::move(bias));
}

std::shared_ptr<const Classifier> trainMlp(const BinaryDataset& ds, const std::vector<std::size_t>& rows,
                                           int classes, const ModelSpec& spec, Rng& rng) {
  constexpr double kRate = 0.05;
  constexpr double kMomentum = 0.9;
  constexpr std::size_t kBatch = 32;
  std::vector<MlpModel::Layer> layers;
  std::size_t in = ds.dim;
  std::vector<std::size_t> sizes = spec.hidden;
  sizes.push_back(static_cast<std::size_t>(classes));
  for (std::size_t out : sizes) {
    MlpModel::Layer layer;
    layer.in = in;
    layer.out = out;
    layer.w.resize(in * out);
    layer.b.assign(out, 0.0);
    const double scale = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(in, 1)));
    for (auto& w : layer.w) w = rng.normal() * scale;
    layers.push_back(std::move(layer));
    in = out;
  }
  std::vector<MlpModel::Layer> velocity = layers;
  for (auto& l : velocity) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }

  std::vector<std::vector<double>> X;
  for (std::size_t r : rows) X.push_back(denseRow(ds.instances[r]));
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t L = layers.size();

  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += kBatch) {
      const std::size_t end = std::min(order.size(), start + kBatch);
      std::vector<MlpModel::Layer> grad = velocity;
      for (auto& l : grad) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
      }
      for (std::size_t p = start; p < end; ++p) {
        const std::size_t i = order[p];
        std::vector<std::vector<double>> acts{X[i]};
        for (std::size_t l = 0; l < L; ++l) {
          const auto& layer = layers[l];
          std::vector<double> next(layer.b);
          for (std::size_t o = 0; o < layer.out; ++o) {
            for (std::size_t k = 0; k < layer.in; ++k) next[o] += layer.w[o * layer.in + k] * acts[l][k];
            if (l + 1 < L) next[o] = std::max(0.0, next[o]);
          }
          acts.push_back(std::move(next));
        }
        std::vector<double> delta = acts.back();
        const double mx = *std::max_element(delta.begin(), delta.end());
        double total = 0.0;
        for (auto& v : delta) total += (v = std::exp(v - mx));
        for (auto& v : delta) v /= total;
        delta[static_cast<std::size_t>(ds.labels[rows[i]])] -= 1.0;
        for (std::size_t l = L; l-- > 0;) {
          const auto& layer = layers[l];
          auto& g = grad[l];
          std::vector<double> back(layer.in, 0.0);
          for (std::size_t o = 0; o < layer.out; ++o) {
            g.b[o] += delta[o];
            for (std::size_t k = 0; k < layer.in; ++k) {
              g.w[o * layer.in + k] += delta[o] * acts[l][k];
              back[k] += layer.w[o * layer.in + k] * delta[o];
            }
          }
          if (l > 0) {
            for (std::size_t k = 0; k < layer.in; ++k) {
              if (acts[l][k] <= 0.0) back[k] = 0.0;
            }
          }
          delta = std::move(back);
        }
      }
      const double scale = kRate / static_cast<double>(end - start);
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t q = 0; q < layers[l].w.size(); ++q) {
          velocity[l].w[q] = kMomentum * velocity[l].w[q] - scale * grad[l].w[q];
          layers[l].w[q] += velocity[l].w[q];
        }
        for (std::size_t q = 0; q < layers[l].b.size(); ++q) {
          velocity[l].b[q] = kMomentum * velocity[l].b[q] - scale * grad[l].b[q];
          layers[l].b[q] += velocity[l].b[q];
        }
      }
    }
  }
  return std::make_shared<MlpModel>(ds.dim, classes, std::move(layers));
}

int majority(const std::vector<std::size_t>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::shared_ptr<const Classifier> trainTree(const BinaryDataset& ds, const std::vector<std::size_t>& rows,
                                            int classes, std::size_t maxDepth) {
  std::vector<TreeModel::Node> nodes;
  auto gini = [&](const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (std::size_t c : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      g -= p * p;
    }
    return g * static_cast<double>(total);
  };
  auto build = [&](auto&& self, const std::vector<std::size_t>& subset, std::size_t level) -> int {
    std::vector<std::size_t> counts(classes, 0);
    for (std::size_t r : subset) ++counts[ds.labels[r]];
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[id].label = majority(counts);
    const double parent = gini(counts, subset.size());
    if (level >= maxDepth || parent <= 0.0) return id;
    int bestFeature = -1;
    double bestImpurity = parent - 1e-12;
    for (std::size_t j = 0; j < ds.dim; ++j) {
      std::vector<std::size_t> ones(classes, 0);
      std::size_t nOnes = 0;
      for (std::size_t r : subset) {
        if (ds.instances[r][j]) {
          ++ones[ds.labels[r]];
          ++nOnes;
        }
      }
      if (nOnes == 0 || nOnes == subset.size()) continue;
      std::vector<std::size_t> zeros(classes);
      for (int c = 0; c < classes; ++c) zeros[c] = counts[c] - ones[c];
      const double impurity = gini(ones, nOnes) + gini(zeros, subset.size() - nOnes);
      if (impurity < bestImpurity) {
        bestImpurity = impurity;
        bestFeature = static_cast<int>(j);
      }
    }
    if (bestFeature < 0) return id;
    std::vector<std::size_t> zeroRows, oneRows;
    for (std::size_t r : subset) {
      (ds.instances[r][static_cast<std::size_t>(bestFeature)] ? oneRows : zeroRows).push_back(r);
    }
    nodes[id].feature = bestFeature;
    const int zero = self(self, zeroRows, level + 1);
    const int one = self(self, oneRows, level + 1);
    nodes[id].zero = zero;
    nodes[id].one = one;
    return id;
  };
  build(build, rows, 0);
  return std::make_shared<TreeModel>(ds.dim, classes, std::move(nodes));
}

}  // namespace

TrainResult trainBuiltin(const BinaryDataset& ds, const ModelSpec& spec, std::uint64_t seed) {
  const std::vector<std::size_t> rows = ds.trainOrAll();
  if (rows.empty()) throw ContractViolation("cannot train on an empty split");
  TrainResult result;
  if (!spec.needsTraining()) {
    result.model = makeFixedModel(ds.dim, spec, seed);
    result.trainAccuracy = accuracy(*result.model, ds, rows);
    return result;
  }
  const int classes = std::max<int>(2, static_cast<int>(ds.numClasses()));
  const int first = ds.labels[rows.front()];
  const bool single = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return ds.labels[r] == first; });
  if (single) {
    result.model = std::make_shared<ConstantModel>(ds.dim, first, classes);
    result.constantWarning = true;
  } else if (spec.kind == ModelSpec::Kind::kLogistic) {
    result.model = trainLogistic(ds, rows, classes);
  } else if (spec.kind == ModelSpec::Kind::kMlp) {
    Rng rng(seed);
    result.model = trainMlp(ds, rows, classes, spec, rng);
  } else {
    result.model = trainTree(ds, rows, classes, spec.depth);
  }
  result.trainAccuracy = accuracy(*result.model, ds, rows);
  return result;
}

}  // namespace ruleseeker
