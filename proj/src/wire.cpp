#include "nanomesh/wire.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "nanomesh/config.h"
#include "nanomesh/constants.h"
#include "nanomesh/errors.h"

namespace nanomesh {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename T>
T parseNumber(const std::map<std::string, std::string>& fields, const std::string& key) {
  auto it = fields.find(key);
  if (it == fields.end()) throw Error("server info lacks " + key);
  T value{};
  const std::string& text = it->second;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw Error("malformed " + key + " in server info: " + text);
  }
  return value;
}

std::vector<std::string_view> lines(std::string_view body) {
  std::vector<std::string_view> out;
  while (!body.empty()) {
    std::size_t end = body.find('\n');
    std::string_view line = body.substr(0, end);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    body.remove_prefix(end == std::string_view::npos ? body.size() : end + 1);
  }
  return out;
}

}  // namespace

bool parseBool(std::string_view text, bool& out) {
  std::string v = lower(text);
  if (v == "true" || v == "yes" || v == "1" || v == "on") {
    out = true;
    return true;
  }
  if (v == "false" || v == "no" || v == "0" || v == "off") {
    out = false;
    return true;
  }
  return false;
}

std::string renderInfo(const ServerInfo& info) {
  std::string out;
  out += "protocol-version: " + info.protocolVersion + "\n";
  out += "journal-id: " + std::to_string(info.journalId) + "\n";
  out += "nanopub-count: " + std::to_string(info.nanopubCount) + "\n";
  out += "page-size: " + std::to_string(info.pageSize) + "\n";
  out += std::string("accepts-posts: ") + (info.acceptsPosts ? "true" : "false") + "\n";
  out += "public-url: " + info.publicUrl + "\n";
  return out;
}

ServerInfo parseInfo(std::string_view body) {
  std::map<std::string, std::string> fields;
  try {
    for (auto& [key, value] : parseKeyValueLines(body)) fields[key] = value;
  } catch (const ConfigError& err) {
    throw Error(std::string("malformed server info: ") + err.what());
  }
  ServerInfo info;
  info.protocolVersion = fields["protocol-version"];
  info.journalId = parseNumber<std::uint64_t>(fields, "journal-id");
  info.nanopubCount = parseNumber<std::uint64_t>(fields, "nanopub-count");
  info.pageSize = parseNumber<std::size_t>(fields, "page-size");
  if (info.pageSize == 0) throw Error("server info has page-size 0");
  if (!parseBool(fields["accepts-posts"], info.acceptsPosts)) info.acceptsPosts = false;
  info.publicUrl = fields["public-url"];
  return info;
}

std::optional<std::string> normalizeServerUrl(std::string_view url) {
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.front()))) url.remove_prefix(1);
  while (!url.empty() && std::isspace(static_cast<unsigned char>(url.back()))) url.remove_suffix(1);
  std::size_t colon = url.find("://");
  if (colon == std::string_view::npos) return std::nullopt;
  std::string scheme = lower(url.substr(0, colon));
  if (scheme != "http" && scheme != "https") return std::nullopt;
  std::string_view rest = url.substr(colon + 3);
  for (char c : rest) {
    if (static_cast<unsigned char>(c) <= 0x20 || c == '?' || c == '#' || c == '\\') {
      return std::nullopt;
    }
  }
  std::size_t slash = rest.find('/');
  std::string host = lower(rest.substr(0, slash));
  std::string path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (host.empty() || host.find('@') != std::string::npos) return std::nullopt;
  if (std::size_t portAt = host.rfind(':'); portAt != std::string::npos && host.back() != ']') {
    std::string_view port = std::string_view(host).substr(portAt + 1);
    if (port.empty() || port.size() > 5 ||
        !std::all_of(port.begin(), port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
        std::stoi(std::string(port)) > 65535) {
      return std::nullopt;
    }
    if ((scheme == "http" && port == "80") || (scheme == "https" && port == "443")) {
      host.resize(portAt);
    }
    if (portAt == 0) return std::nullopt;
  }
  if (path.back() != '/') path.push_back('/');
  return scheme + "://" + host + path;
}

std::string renderUrlList(std::span<const std::string> urls) {
  std::string out;
  for (const auto& url : urls) out += url + "\n";
  return out;
}

std::vector<std::string> parsePeerList(std::string_view body) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto line : lines(body)) {
    auto url = normalizeServerUrl(line);
    if (url && seen.insert(*url).second) out.push_back(*url);
  }
  return out;
}

std::string renderPageListing(std::string_view publicUrl,
                              std::span<const ArtifactCode> codes) {
  std::string out;
  out.reserve(codes.size() * (publicUrl.size() + kArtifactCodeLength + 1));
  for (const auto& code : codes) {
    out += publicUrl;
    out += code.str();
    out.push_back('\n');
  }
  return out;
}

std::vector<ArtifactCode> parsePageListing(std::string_view body) {
  std::vector<ArtifactCode> out;
  for (auto line : lines(body)) {
    if (line.empty()) continue;
    if (line.size() < kArtifactCodeLength) {
      throw MalformedCodeError("journal line too short: " + std::string(line));
    }
    out.push_back(ArtifactCode::parse(line.substr(line.size() - kArtifactCodeLength)));
  }
  return out;
}

}  // namespace nanomesh
