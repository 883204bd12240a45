#include "nanomesh/config.h"

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>

#include "nanomesh/errors.h"
#include "nanomesh/rdf_io.h"
#include "nanomesh/wire.h"

namespace nanomesh {

namespace {

const std::set<std::string>& knownKeys() {
  static const std::set<std::string> keys = {
      "listen-address", "public-url",    "data-dir",  "page-size",
      "accepts-posts",  "peer-seeds",    "loop-interval", "log-level",
  };
  return keys;
}

std::string envName(const std::string& key) {
  std::string out = "NANOMESH_";
  for (char c : key) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::size_t parseCount(const std::string& key, const std::string& value) {
  std::size_t n = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError(key + " must be a non-negative integer, got '" + value + "'");
  }
  return n;
}

std::vector<std::string> splitUrls(const std::string& key, const std::string& value) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    auto url = normalizeServerUrl(current);
    if (!url) throw ConfigError(key + " contains an invalid URL: " + current);
    out.push_back(*url);
    current.clear();
  };
  for (char c : value) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

void apply(ServerConfig& config, const std::string& key, const std::string& value) {
  if (key == "listen-address") {
    config.listenAddress = value;
  } else if (key == "public-url") {
    auto url = normalizeServerUrl(value);
    if (!url) throw ConfigError("public-url must be an absolute http(s) URL, got '" + value + "'");
    config.publicUrl = *url;
  } else if (key == "data-dir") {
    config.dataDir = value;
  } else if (key == "page-size") {
    config.pageSize = parseCount(key, value);
  } else if (key == "accepts-posts") {
    if (!parseBool(value, config.acceptsPosts)) {
      throw ConfigError("accepts-posts must be true or false, got '" + value + "'");
    }
  } else if (key == "peer-seeds") {
    config.peerSeeds = splitUrls(key, value);
  } else if (key == "loop-interval") {
    double seconds = 0;
    try {
      std::size_t used = 0;
      seconds = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("loop-interval must be a number of seconds, got '" + value + "'");
    }
    if (!(seconds > 0)) throw ConfigError("loop-interval must be positive");
    config.loopInterval = std::chrono::milliseconds(static_cast<long long>(seconds * 1000));
  } else if (key == "log-level") {
    config.logLevel = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

}  // namespace

std::string ServerConfig::listenHost() const {
  return listenAddress.substr(0, listenAddress.rfind(':'));
}

int ServerConfig::listenPort() const {
  auto colon = listenAddress.rfind(':');
  if (colon == std::string::npos) return -1;
  std::string_view port = std::string_view(listenAddress).substr(colon + 1);
  int value = -1;
  auto [end, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || end != port.data() + port.size()) return -1;
  return value;
}

std::vector<std::pair<std::string, std::string>> parseKeyValueLines(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t lineNo = 0;
  while (!text.empty()) {
    ++lineNo;
    std::size_t end = text.find('\n');
    std::string line = trim(text.substr(0, end));
    text.remove_prefix(end == std::string_view::npos ? text.size() : end + 1);
    if (line.empty() || line.front() == '#') continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos || colon == 0) {
      throw ConfigError("line " + std::to_string(lineNo) + ": expected 'key: value'");
    }
    out.emplace_back(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
  }
  return out;
}

std::optional<std::string> processEnv(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  if (!value) return std::nullopt;
  return std::string(value);
}

ServerConfig loadConfig(const std::optional<std::filesystem::path>& file,
                        const EnvLookup& env,
                        const std::map<std::string, std::string>& overrides) {
  ServerConfig config;
  if (file) {
    std::string text;
    try {
      text = readFile(*file);
    } catch (const std::exception& err) {
      throw ConfigError(err.what());
    }
    try {
      for (const auto& [key, value] : parseKeyValueLines(text)) apply(config, key, value);
    } catch (const ConfigError& err) {
      throw ConfigError(file->string() + ": " + err.what());
    }
  }
  for (const auto& key : knownKeys()) {
    if (auto value = env(envName(key))) {
      try {
        apply(config, key, trim(*value));
      } catch (const ConfigError& err) {
        throw ConfigError(envName(key) + ": " + err.what());
      }
    }
  }
  for (const auto& [key, value] : overrides) apply(config, key, value);

  if (config.publicUrl.empty()) throw ConfigError("public-url is required");
  if (config.dataDir.empty()) throw ConfigError("data-dir is required");
  if (config.pageSize < 1) throw ConfigError("page-size must be at least 1");
  int port = config.listenPort();
  if (port < 0 || port > 65535 || config.listenHost().empty()) {
    throw ConfigError("listen-address must be host:port, got '" + config.listenAddress + "'");
  }
  return config;
}

std::vector<std::string> loadServerList(const std::filesystem::path& file) {
  std::string text;
  try {
    text = readFile(file);
  } catch (const std::exception& err) {
    throw ConfigError(err.what());
  }
  std::vector<std::string> out;
  std::size_t lineNo = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    ++lineNo;
    std::size_t end = rest.find('\n');
    std::string line = trim(rest.substr(0, end));
    rest.remove_prefix(end == std::string_view::npos ? rest.size() : end + 1);
    if (line.empty() || line.front() == '#') continue;
    auto url = normalizeServerUrl(line);
    if (!url) {
      throw ConfigError(file.string() + ":" + std::to_string(lineNo) + ": not a server URL");
    }
    out.push_back(*url);
  }
  return out;
}

void initLogging(const std::string& level, const std::optional<std::filesystem::path>& file) {
  spdlog::drop("nanomesh");
  std::shared_ptr<spdlog::logger> logger;
  if (file) {
    logger = spdlog::basic_logger_mt("nanomesh", file->string());
  } else {
    logger = spdlog::stderr_logger_mt("nanomesh");
  }
  logger->set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");
  auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") {
    throw ConfigError("unknown log level '" + level + "'");
  }
  logger->set_level(parsed);
  logger->flush_on(spdlog::level::info);
  spdlog::set_default_logger(logger);
}

}  // namespace nanomesh
