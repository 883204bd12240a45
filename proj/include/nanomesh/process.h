#pragma once

// Child processes for multi-process test networks.

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nanomesh {

class ChildProcess {
 public:
  // argv[0] is the executable path. stdout and stderr go to `logFile`
  // (appended). Throws Error if the process cannot be started.
  static ChildProcess spawn(const std::vector<std::string>& argv,
                            const std::filesystem::path& logFile);

  ChildProcess() = default;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  // Terminates a still running child (SIGTERM, then SIGKILL after 10 s).
  ~ChildProcess();

  pid_t pid() const { return pid_; }
  bool running();
  void signal(int sig);
  // Waits for exit and returns the raw wait status, or nullopt on timeout.
  std::optional<int> wait(std::chrono::milliseconds timeout);
  // SIGTERM, wait, SIGKILL if needed. Returns the wait status.
  int terminate(std::chrono::milliseconds grace = std::chrono::seconds(10));

 private:
  pid_t pid_ = -1;
  std::optional<int> status_;
};

// The directory of the running executable, for finding sibling tools.
std::filesystem::path selfDirectory();

}  // namespace nanomesh
