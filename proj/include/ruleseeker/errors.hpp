#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ruleseeker {

// Precondition / invariant failure at a module boundary.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dataset ingest failures. `line` is 1-based, 0 when not tied to a line.
class LoadError : public std::runtime_error {
 public:
  enum class Kind { kUnreadable, kRaggedRow, kMissingTarget, kBadManifest, kFit };

  LoadError(Kind kind, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// External oracle died, timed out, or could not be started.
class OracleUnavailable : public std::runtime_error {
 public:
  OracleUnavailable(const std::string& what, std::uint64_t answered)
      : std::runtime_error(what), answered_(answered) {}

  // Number of membership queries answered before the failure.
  std::uint64_t answered() const { return answered_; }

 private:
  std::uint64_t answered_;
};

// Reply from the external oracle did not follow the wire protocol.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConditioningInfeasible : public std::runtime_error {
 public:
  ConditioningInfeasible(const std::string& what, std::size_t covered)
      : std::runtime_error(what), covered_(covered) {}
  std::size_t covered() const { return covered_; }

 private:
  std::size_t covered_;
};

// Exhaustive enumeration refused because the subset count exceeds its cap.
class EnumerationRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ruleseeker
