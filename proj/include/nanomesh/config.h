#pragma once

// Server configuration and logging setup.
//
// Config files use the same `key: value` lines as the info endpoint. Every
// key can also come from the environment as NANOMESH_<KEY> with dashes
// turned into underscores (NANOMESH_PAGE_SIZE). Precedence, highest first:
// explicit overrides (command-line flags), environment, file, defaults.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nanomesh/constants.h"

namespace nanomesh {

struct ServerConfig {
  std::string listenAddress = "127.0.0.1:7878";  // host:port
  std::string publicUrl;
  std::filesystem::path dataDir;
  std::size_t pageSize = kDefaultPageSize;
  bool acceptsPosts = true;
  std::vector<std::string> peerSeeds;
  std::chrono::milliseconds loopInterval{10000};
  std::string logLevel = "info";

  std::string listenHost() const;
  int listenPort() const;
};

// `key: value` lines; blank lines and lines starting with '#' are skipped.
// Throws ConfigError naming the line for anything else.
std::vector<std::pair<std::string, std::string>> parseKeyValueLines(
    std::string_view text);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> processEnv(const std::string& name);

// Throws ConfigError for unknown file keys, malformed values and missing
// public-url or data-dir.
ServerConfig loadConfig(const std::optional<std::filesystem::path>& file,
                        const EnvLookup& env = processEnv,
                        const std::map<std::string, std::string>& overrides = {});

// One server URL per line, '#' comments allowed. URLs are normalized;
// invalid ones throw ConfigError.
std::vector<std::string> loadServerList(const std::filesystem::path& file);

// Configures the default spdlog logger (stderr, or `file` if given).
void initLogging(const std::string& level,
                 const std::optional<std::filesystem::path>& file = std::nullopt);

}  // namespace nanomesh
