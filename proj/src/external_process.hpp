#pragma once

#include <sys/types.h>

#include <chrono>
#include <string>

namespace ruleseeker {

// Child process reached through its stdin/stdout with line framing. Not
// thread-safe; callers serialize access.
class ExternalProcess {
 public:
  ExternalProcess(const std::string& command, std::chrono::milliseconds replyTimeout);
  ~ExternalProcess();

  ExternalProcess(const ExternalProcess&) = delete;
  ExternalProcess& operator=(const ExternalProcess&) = delete;

  // Both throw OracleUnavailable (answered = 0; callers rethrow with their
  // own progress count) on a dead pipe, EOF, or timeout.
  void writeLine(const std::string& line);
  std::string readLine();

  // Closes stdin and waits up to `grace` for exit, then kills. Returns true if
  // the child exited on its own.
  bool close(std::chrono::milliseconds grace = std::chrono::seconds(2));

  const std::string& command() const { return command_; }

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int toChild_ = -1;
  int fromChild_ = -1;
  std::string buffer_;
};

}  // namespace ruleseeker
