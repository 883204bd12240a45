#pragma once

// Text bodies exchanged between servers and clients.
//
//   GET /              info: `key: value` lines
//   GET /journal/{p}   one trusty URI per line (public URL + code)
//   GET /peers         one server URL per line
//
// Server URLs are compared in normalized form: lowercase scheme and host,
// no query or fragment, trailing slash.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nanomesh/trusty.h"

namespace nanomesh {

struct ServerInfo {
  std::string protocolVersion;
  std::uint64_t journalId = 0;
  std::uint64_t nanopubCount = 0;
  std::size_t pageSize = 0;
  bool acceptsPosts = false;
  std::string publicUrl;

  friend bool operator==(const ServerInfo&, const ServerInfo&) = default;
};

std::string renderInfo(const ServerInfo& info);
// Throws Error for missing keys or malformed numbers. Unknown keys are
// ignored so newer servers stay readable.
ServerInfo parseInfo(std::string_view body);

// http(s) URLs only; nullopt for anything else.
std::optional<std::string> normalizeServerUrl(std::string_view url);

std::string renderUrlList(std::span<const std::string> urls);
// Invalid lines are skipped; the result is normalized and deduplicated.
std::vector<std::string> parsePeerList(std::string_view body);

std::string renderPageListing(std::string_view publicUrl,
                              std::span<const ArtifactCode> codes);
// Codes from the last 45 characters of each line. Throws MalformedCodeError.
std::vector<ArtifactCode> parsePageListing(std::string_view body);

bool parseBool(std::string_view text, bool& out);

}  // namespace nanomesh
