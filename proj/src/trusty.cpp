#include "nanomesh/trusty.h"

#include <openssl/sha.h>

#include <algorithm>

#include "nanomesh/constants.h"
#include "nanomesh/errors.h"
#include "nanomesh/rdf_io.h"

namespace nanomesh {

namespace {

int alphabetIndex(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '-') return 62;
  if (c == '_') return 63;
  return -1;
}

std::optional<std::string> codeProblem(std::string_view text) {
  if (text.size() != kArtifactCodeLength) {
    return "artifact code must be 45 characters, got " +
           std::to_string(text.size());
  }
  if (text.substr(0, 2) != kModuleId) return "artifact code must start with RA";
  for (char c : text.substr(2)) {
    if (alphabetIndex(c) < 0) return "invalid character in artifact code";
  }
  // 43 * 6 = 258 bits; the two trailing padding bits must be zero.
  if ((alphabetIndex(text.back()) & 0x3) != 0) {
    return "non-zero padding bits in artifact code";
  }
  return std::nullopt;
}

// How an IRI under the nanopublication's own namespace is rewritten.
struct OwnPrefix {
  std::string prefix;
  bool pending;  // prefix lacks the code
};

OwnPrefix ownPrefix(const Nanopub& np) {
  const std::string& uri = np.uri();
  if (hasArtifactCode(uri)) return {uri, false};
  if (uri.empty() || !isCodeTerminator(uri.back())) {
    throw TrustyError("nanopublication URI " + uri +
                      " neither carries an artifact code nor ends in '#', "
                      "'/' or '.'");
  }
  return {uri, true};
}

// Suffix placed after the code for an IRI that was `prefix + suffix` in the
// pending form.
std::string_view separatorFor(std::string_view suffix) {
  if (suffix.empty() || isCodeTerminator(suffix.front())) return {};
  return "#";
}

// In the pending form, IRIs under the same base that already carry a code
// belong to other artifacts (e.g. earlier links of an index chain).
bool isOtherArtifact(std::string_view suffix) {
  if (suffix.size() < kArtifactCodeLength) return false;
  if (suffix.size() > kArtifactCodeLength &&
      !isCodeTerminator(suffix[kArtifactCodeLength])) {
    return false;
  }
  return !codeProblem(suffix.substr(0, kArtifactCodeLength));
}

bool isOwnIri(std::string_view iri, const OwnPrefix& own) {
  return iri.starts_with(own.prefix) &&
         !(own.pending && isOtherArtifact(iri.substr(own.prefix.size())));
}

void appendIri(std::string& out, std::string_view iri) {
  out.push_back('<');
  out += iri;
  out.push_back('>');
}

void appendCanonicalIri(std::string& out, const std::string& iri,
                        const OwnPrefix& own) {
  if (iri.find(' ') != std::string::npos) {
    throw TrustyError("IRI contains a space: " + iri);
  }
  if (!isOwnIri(iri, own)) {
    appendIri(out, iri);
    return;
  }
  std::string_view suffix = std::string_view(iri).substr(own.prefix.size());
  std::string mapped = " ";
  if (own.pending) mapped += separatorFor(suffix);
  mapped += suffix;
  appendIri(out, mapped);
}

}  // namespace

ArtifactCode ArtifactCode::parse(std::string_view text) {
  if (auto problem = codeProblem(text)) throw MalformedCodeError(*problem);
  return ArtifactCode(std::string(text));
}

std::optional<ArtifactCode> ArtifactCode::tryParse(std::string_view text) {
  if (codeProblem(text)) return std::nullopt;
  return ArtifactCode(std::string(text));
}

ArtifactCode ArtifactCode::fromDigest(
    const std::array<std::uint8_t, 32>& digest) {
  std::string text(kModuleId);
  std::uint32_t buffer = 0;
  int bits = 0;
  for (std::uint8_t byte : digest) {
    buffer = (buffer << 8) | byte;
    bits += 8;
    while (bits >= 6) {
      bits -= 6;
      text.push_back(kCodeAlphabet[(buffer >> bits) & 0x3F]);
    }
  }
  // 256 = 42 * 6 + 4: four bits remain, padded with two zero bits.
  text.push_back(kCodeAlphabet[(buffer << (6 - bits)) & 0x3F]);
  return ArtifactCode(std::move(text));
}

TrustyUri TrustyUri::parse(std::string_view uri) {
  if (uri.size() <= kArtifactCodeLength) {
    throw MalformedCodeError("URI too short to carry an artifact code: " +
                             std::string(uri));
  }
  std::string_view base = uri.substr(0, uri.size() - kArtifactCodeLength);
  if (!isCodeTerminator(base.back())) {
    throw MalformedCodeError("artifact code not preceded by '#', '/' or '.'");
  }
  return TrustyUri{std::string(base),
                   ArtifactCode::parse(uri.substr(base.size()))};
}

std::optional<TrustyUri> TrustyUri::tryParse(std::string_view uri) {
  if (!hasArtifactCode(uri)) return std::nullopt;
  return parse(uri);
}

bool isCodeTerminator(char c) { return c == '#' || c == '/' || c == '.'; }

bool hasArtifactCode(std::string_view uri) {
  if (uri.size() <= kArtifactCodeLength) return false;
  std::size_t split = uri.size() - kArtifactCodeLength;
  return isCodeTerminator(uri[split - 1]) && !codeProblem(uri.substr(split));
}

std::optional<ArtifactCode> extractCode(std::string_view uriOrCode) {
  if (uriOrCode.size() < kArtifactCodeLength) return std::nullopt;
  return ArtifactCode::tryParse(
      uriOrCode.substr(uriOrCode.size() - kArtifactCodeLength));
}

std::string canonicalize(const Nanopub& np) {
  OwnPrefix own = ownPrefix(np);
  std::vector<std::string> lines;
  lines.reserve(np.quads().size());
  for (const Quad& q : np.quads()) {
    std::string line;
    appendCanonicalIri(line, q.subject.value(), own);
    line.push_back(' ');
    appendCanonicalIri(line, q.predicate.value(), own);
    line.push_back(' ');
    if (q.object.isIri()) {
      appendCanonicalIri(line, q.object.value(), own);
    } else {
      appendTerm(line, q.object);
    }
    line.push_back(' ');
    appendCanonicalIri(line, q.graph.value(), own);
    line += " .";
    lines.push_back(std::move(line));
  }
  // Byte order of UTF-8 equals code point order.
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) {
    out += line;
    out.push_back('\n');
  }
  return out;
}

ArtifactCode computeCode(const Nanopub& np) {
  std::string bytes = canonicalize(np);
  std::array<std::uint8_t, 32> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(),
         digest.data());
  return ArtifactCode::fromDigest(digest);
}

Nanopub makeTrusty(const Nanopub& np) {
  if (hasArtifactCode(np.uri())) {
    throw TrustyError("already trusty: " + np.uri());
  }
  OwnPrefix own = ownPrefix(np);
  ArtifactCode code = computeCode(np);
  auto rewrite = [&](const Term& t) {
    if (!t.isIri() || !isOwnIri(t.value(), own)) return t;
    std::string_view suffix =
        std::string_view(t.value()).substr(own.prefix.size());
    std::string iri = own.prefix + code.str();
    iri += separatorFor(suffix);
    iri += suffix;
    return Term::iri(std::move(iri));
  };
  std::vector<Quad> quads;
  quads.reserve(np.quads().size());
  for (const Quad& q : np.quads()) {
    quads.push_back(Quad{rewrite(q.subject), rewrite(q.predicate),
                         rewrite(q.object), rewrite(q.graph)});
  }
  return assembleNanopub(std::move(quads), std::max(np.quads().size(),
                                                    kMaxQuadsPerNanopub));
}

bool verify(const Nanopub& np) {
  ArtifactCode embedded = TrustyUri::parse(np.uri()).code;
  return computeCode(np) == embedded;
}

bool verifyAs(const Nanopub& np, const ArtifactCode& expected) {
  auto uri = TrustyUri::tryParse(np.uri());
  return uri && uri->code == expected && computeCode(np) == expected;
}

}  // namespace nanomesh
