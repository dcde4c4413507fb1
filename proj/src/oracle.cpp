#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "external_process.hpp"
#include "ruleseeker/blackbox.hpp"
#include "ruleseeker/errors.hpp"

namespace ruleseeker {

std::vector<int> predictBatchSerial(const Classifier& model, std::span<const Instance> batch) {
  std::vector<int> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) out[i] = model.predictClass(batch[i]);
  return out;
}

std::vector<int> predictBatchParallel(const Classifier& model, std::span<const Instance> batch) {
  std::vector<int> out(batch.size());
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(static) if (n >= 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = model.predictClass(batch[static_cast<std::size_t>(i)]);
  }
  return out;
}

struct OracleHandle::Backend {
  OracleKind kind = OracleKind::kBuiltin;
  std::size_t dim = 0;
  std::shared_ptr<const Classifier> model;
  std::unique_ptr<ExternalProcess> process;
  std::mutex mutex;  // one external request in flight
  std::atomic<std::uint64_t> queries{0};

  ~Backend() {
    if (process) {
      try {
        process->writeLine(R"({"op":"bye"})");
      } catch (const std::exception&) {
      }
      process->close();
    }
  }
};

OracleHandle OracleHandle::builtin(std::shared_ptr<const Classifier> model) {
  if (!model) throw ContractViolation("null classifier");
  auto b = std::make_shared<Backend>();
  b->kind = OracleKind::kBuiltin;
  b->dim = model->dim();
  b->model = std::move(model);
  return OracleHandle(std::move(b));
}

OracleHandle OracleHandle::external(const std::string& command, std::chrono::milliseconds replyTimeout) {
  auto b = std::make_shared<Backend>();
  b->kind = OracleKind::kExternal;
  b->process = std::make_unique<ExternalProcess>(command, replyTimeout);
  b->process->writeLine(R"({"op":"hello"})");
  const std::string reply = b->process->readLine();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("handshake reply is not JSON: " + reply);
  }
  if (!j.is_object() || j.value("op", "") != "hello" || !j.contains("dim") ||
      !j["dim"].is_number_unsigned() || j.size() != 2) {
    throw ProtocolError("bad handshake reply: " + reply);
  }
  b->dim = j["dim"].get<std::size_t>();
  return OracleHandle(std::move(b));
}

OracleKind OracleHandle::kind() const { return backend_->kind; }
std::size_t OracleHandle::dim() const { return backend_->dim; }
std::uint64_t OracleHandle::queryCount() const { return backend_->queries.load(); }

std::string OracleHandle::describe() const {
  std::string s = backend_->kind == OracleKind::kBuiltin ? "builtin:" + backend_->model->describe()
                                                          : "exec:" + backend_->process->command();
  if (target_) s += " (one-vs-rest class " + std::to_string(*target_) + ")";
  return s;
}

int OracleHandle::numClasses() const {
  return backend_->kind == OracleKind::kBuiltin ? backend_->model->numClasses() : 2;
}

OracleHandle OracleHandle::oneVsRest(int targetClass) const {
  if (targetClass < 0 || targetClass >= numClasses()) throw ContractViolation("target class out of range");
  OracleHandle h = *this;
  h.target_ = targetClass;
  return h;
}

int OracleHandle::predictClass(const Instance& z) const {
  if (backend_->kind != OracleKind::kBuiltin) return predict(z);
  if (z.dim() != dim()) throw ContractViolation("instance dimension does not match the oracle");
  backend_->queries.fetch_add(1);
  return backend_->model->predictClass(z);
}

std::vector<int> OracleHandle::predict(std::span<const Instance> batch) const {
  for (const auto& z : batch) {
    if (z.dim() != dim()) throw ContractViolation("instance dimension does not match the oracle");
  }
  if (batch.empty()) return {};
  Backend& b = *backend_;
  if (b.kind == OracleKind::kBuiltin) {
    if (!target_ && b.model->numClasses() > 2) {
      throw ContractViolation("multi-class model needs a one-vs-rest target class");
    }
    std::vector<int> labels = predictBatchParallel(*b.model, batch);
    if (target_) {
      for (int& y : labels) y = y == *target_ ? 1 : 0;
    }
    b.queries.fetch_add(batch.size());
    return labels;
  }

  std::lock_guard<std::mutex> lock(b.mutex);
  std::string req;
  req.reserve(32 + batch.size() * (2 * dim() + 3));
  req += R"({"op":"predict","x":[)";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (i) req += ',';
    req += '[';
    for (std::size_t j = 0; j < dim(); ++j) {
      if (j) req += ',';
      req += batch[i][j] ? '1' : '0';
    }
    req += ']';
  }
  req += "]}";
  std::string reply;
  try {
    b.process->writeLine(req);
    reply = b.process->readLine();
  } catch (const OracleUnavailable& e) {
    throw OracleUnavailable(e.what(), b.queries.load());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("predict reply is not JSON: " + reply.substr(0, 200));
  }
  if (!j.is_object() || j.value("op", "") != "labels" || !j.contains("y") || !j["y"].is_array()) {
    throw ProtocolError("unexpected predict reply: " + reply.substr(0, 200));
  }
  const auto& y = j["y"];
  if (y.size() != batch.size()) {
    throw ProtocolError("reply has " + std::to_string(y.size()) + " labels for " +
                        std::to_string(batch.size()) + " instances");
  }
  std::vector<int> labels(batch.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!y[i].is_number_integer() || (y[i].get<int>() != 0 && y[i].get<int>() != 1)) {
      throw ProtocolError("label " + std::to_string(i) + " is not 0 or 1");
    }
    labels[i] = y[i].get<int>();
    if (target_) labels[i] = labels[i] == *target_ ? 1 : 0;
  }
  b.queries.fetch_add(batch.size());
  return labels;
}

int OracleHandle::predict(const Instance& z) const { return predict(std::span<const Instance>(&z, 1)).front(); }

OracleSpec OracleSpec::parse(const std::string& text) {
  OracleSpec s;
  if (text.rfind("builtin:", 0) == 0) {
    s.kind = Kind::kBuiltin;
    s.model = ModelSpec::parse(text.substr(8));
  } else if (text.rfind("exec:", 0) == 0) {
    s.kind = Kind::kExec;
    s.command = text.substr(5);
    if (s.command.empty()) throw ContractViolation("exec oracle needs a command line");
  } else {
    throw ContractViolation("oracle spec must start with 'builtin:' or 'exec:'");
  }
  return s;
}

std::string OracleSpec::toString() const {
  return kind == Kind::kBuiltin ? "builtin:" + model.toString() : "exec:" + command;
}

namespace {

void step(std::vector<ConformanceStep>& out, std::string name, bool ok, std::string detail = "") {
  out.push_back({std::move(name), ok, std::move(detail)});
}

std::string predictRequest(const std::vector<Instance>& batch) {
  std::string req = R"({"op":"predict","x":[)";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (i) req += ',';
    req += '[';
    for (std::size_t j = 0; j < batch[i].dim(); ++j) {
      if (j) req += ',';
      req += batch[i][j] ? '1' : '0';
    }
    req += ']';
  }
  return req + "]}";
}

// Labels from a bit-exact `{"op":"labels","y":[...]}` line, or nullopt.
std::optional<std::vector<int>> parseLabels(const std::string& line, std::size_t expected) {
  std::string canonical;
  try {
    const auto j = nlohmann::json::parse(line);
    if (!j.is_object() || j.size() != 2 || j.value("op", "") != "labels" || !j["y"].is_array()) {
      return std::nullopt;
    }
    std::vector<int> y;
    for (const auto& v : j["y"]) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) return std::nullopt;
      y.push_back(v.get<int>());
    }
    canonical = R"({"op":"labels","y":[)";
    for (std::size_t i = 0; i < y.size(); ++i) canonical += (i ? "," : "") + std::to_string(y[i]);
    canonical += "]}";
    if (canonical != line || y.size() != expected) return std::nullopt;
    return y;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<ConformanceStep> runConformance(const std::string& command, std::chrono::milliseconds replyTimeout) {
  std::vector<ConformanceStep> steps;
  ExternalProcess proc(command, replyTimeout);
  std::size_t dim = 0;
  try {
    proc.writeLine(R"({"op":"hello"})");
    const std::string reply = proc.readLine();
    try {
      const auto j = nlohmann::json::parse(reply);
      if (j.is_object() && j.contains("dim") && j["dim"].is_number_unsigned()) dim = j["dim"].get<std::size_t>();
    } catch (const nlohmann::json::exception&) {
    }
    const bool exact = dim > 0 && reply == R"({"op":"hello","dim":)" + std::to_string(dim) + "}";
    step(steps, "handshake", exact, reply);
    if (!exact) return steps;

    Rng rng(0x5eed);
    auto randomBatch = [&](std::size_t n) {
      std::vector<Instance> b;
      for (std::size_t i = 0; i < n; ++i) {
        Instance z(dim);
        for (std::size_t j = 0; j < dim; ++j) z.set(j, rng.bernoulli(0.5));
        b.push_back(std::move(z));
      }
      return b;
    };

    std::vector<std::vector<Instance>> batches{randomBatch(3), randomBatch(17), randomBatch(1000)};
    std::vector<std::vector<int>> answers;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      proc.writeLine(predictRequest(batches[b]));
      const std::string line = proc.readLine();
      auto y = parseLabels(line, batches[b].size());
      step(steps, "predict batch of " + std::to_string(batches[b].size()), y.has_value(),
           y ? "" : line.substr(0, 200));
      if (!y) return steps;
      answers.push_back(*y);
    }

    proc.writeLine(predictRequest(batches[0]));
    auto replay = parseLabels(proc.readLine(), batches[0].size());
    step(steps, "replay is deterministic", replay && *replay == answers[0]);

    proc.writeLine(R"({"op":"predict","x":"not-a-matrix"})");
    const std::string errLine = proc.readLine();
    bool isError = false;
    try {
      const auto j = nlohmann::json::parse(errLine);
      isError = j.is_object() && j.value("op", "") == "error" && j.contains("msg") && j["msg"].is_string();
    } catch (const nlohmann::json::exception&) {
    }
    step(steps, "malformed request yields error reply", isError, errLine.substr(0, 200));

    std::vector<Instance> again{batches[1][0]};
    proc.writeLine(predictRequest(again));
    auto recovered = parseLabels(proc.readLine(), 1);
    step(steps, "recovers after malformed request", recovered && (*recovered)[0] == answers[1][0]);

    proc.writeLine(R"({"op":"bye"})");
    step(steps, "bye ends the session", proc.close(std::chrono::seconds(5)));
  } catch (const OracleUnavailable& e) {
    step(steps, "oracle available", false, e.what());
  }
  return steps;
}

}  // namespace ruleseeker
