#include "external_process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "ruleseeker/errors.hpp"

namespace ruleseeker {
namespace {

void ignoreSigpipeOnce() {
  static const bool done = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)done;
}

}  // namespace

ExternalProcess::ExternalProcess(const std::string& command, std::chrono::milliseconds replyTimeout)
    : command_(command), timeout_(replyTimeout) {
  ignoreSigpipeOnce();
  int in[2];
  int out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw OracleUnavailable("pipe2() failed: " + std::string(std::strerror(errno)), 0);
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw OracleUnavailable("pipe2() failed: " + std::string(std::strerror(errno)), 0);
  }
  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {in[0], in[1], out[0], out[1]}) ::close(fd);
    throw OracleUnavailable("fork() failed: " + std::string(std::strerror(errno)), 0);
  }
  if (pid_ == 0) {
    // Own process group so a kill also reaches grandchildren of the shell.
    ::setpgid(0, 0);
    ::dup2(in[0], STDIN_FILENO);
    ::dup2(out[1], STDOUT_FILENO);
    for (int fd : {in[0], in[1], out[0], out[1]}) ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid_, pid_);
  ::close(in[0]);
  ::close(out[1]);
  toChild_ = in[1];
  fromChild_ = out[0];
}

ExternalProcess::~ExternalProcess() { close(std::chrono::milliseconds(500)); }

void ExternalProcess::writeLine(const std::string& line) {
  if (toChild_ < 0) throw OracleUnavailable("oracle stdin already closed", 0);
  std::string data = line;
  data += '\n';
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::write(toChild_, data.data() + sent, data.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw OracleUnavailable("write to oracle failed: " + std::string(std::strerror(errno)), 0);
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string ExternalProcess::readLine() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (fromChild_ < 0) throw OracleUnavailable("oracle stdout closed", 0);
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw OracleUnavailable("oracle reply timed out", 0);
    pollfd pfd{fromChild_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw OracleUnavailable("poll on oracle failed: " + std::string(std::strerror(errno)), 0);
    }
    if (ready == 0) throw OracleUnavailable("oracle reply timed out", 0);
    char chunk[65536];
    const ssize_t n = ::read(fromChild_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw OracleUnavailable("read from oracle failed: " + std::string(std::strerror(errno)), 0);
    }
    if (n == 0) throw OracleUnavailable("oracle process closed its output", 0);
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

bool ExternalProcess::close(std::chrono::milliseconds grace) {
  if (toChild_ >= 0) {
    ::close(toChild_);
    toChild_ = -1;
  }
  bool clean = true;
  if (pid_ > 0) {
    const auto deadline = std::chrono::steady_clock::now() + grace;
    int status = 0;
    for (;;) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_ || r < 0) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(-pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        clean = false;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    pid_ = -1;
  }
  if (fromChild_ >= 0) {
    ::close(fromChild_);
    fromChild_ = -1;
  }
  return clean;
}

}  // namespace ruleseeker
