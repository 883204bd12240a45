#pragma once

// Hash-bearing identifiers for nanopublications.
//
// The artifact code is "RA" followed by 43 characters encoding the SHA-256
// digest of the canonical form, six bits per character (MSB first) over the
// URL-safe alphabet A-Z a-z 0-9 - _, with the final two bits zero.
//
// Canonical form: every IRI that starts with the nanopublication's own URI
// (with or without code) has that prefix replaced by a single space, the
// quads are written as line-quads statements, the lines are sorted by code
// point, and the result is joined with '\n' including a trailing newline.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "nanomesh/rdf.h"

namespace nanomesh {

class ArtifactCode {
 public:
  // Throws MalformedCodeError.
  static ArtifactCode parse(std::string_view text);
  static std::optional<ArtifactCode> tryParse(std::string_view text);
  static ArtifactCode fromDigest(const std::array<std::uint8_t, 32>& digest);

  const std::string& str() const { return text_; }
  std::string_view digestChars() const {
    return std::string_view(text_).substr(2);
  }

  friend bool operator==(const ArtifactCode&, const ArtifactCode&) = default;
  friend auto operator<=>(const ArtifactCode&, const ArtifactCode&) = default;

 private:
  explicit ArtifactCode(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

// base ++ code, where base ends in '#', '/' or '.'.
struct TrustyUri {
  std::string base;
  ArtifactCode code;

  // Throws MalformedCodeError if `uri` does not end in a well-formed code
  // preceded by a terminator character.
  static TrustyUri parse(std::string_view uri);
  static std::optional<TrustyUri> tryParse(std::string_view uri);
  std::string str() const { return base + code.str(); }

  friend bool operator==(const TrustyUri&, const TrustyUri&) = default;
};

bool isCodeTerminator(char c);

// True iff the URI ends in a well-formed artifact code after a terminator.
bool hasArtifactCode(std::string_view uri);

// Accepts a bare code or any string ending in one.
std::optional<ArtifactCode> extractCode(std::string_view uriOrCode);

// Canonical bytes as described above. Throws TrustyError if the URI is
// neither trusty nor ends in a terminator, or if an IRI contains a space.
std::string canonicalize(const Nanopub& np);

ArtifactCode computeCode(const Nanopub& np);

// Mints the code and rewrites every IRI under the pending URI to carry it.
// `http://ex.org/np1#assertion` becomes `http://ex.org/np1#RA...#assertion`.
// Throws TrustyError for input that already has a code.
Nanopub makeTrusty(const Nanopub& np);

// Recomputes the code over the received quads. Throws MalformedCodeError if
// the URI does not end in a well-formed code.
bool verify(const Nanopub& np);

// verify(np) and the URI carries `expected`.
bool verifyAs(const Nanopub& np, const ArtifactCode& expected);

}  // namespace nanomesh
