#pragma once

// RDF quad model and nanopublication structure.

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nanomesh/constants.h"

namespace nanomesh {

// True for "scheme:..." where scheme is ALPHA *( ALPHA / DIGIT / "+" / "-" /
// "." ).
bool isAbsoluteIri(std::string_view iri);

// An IRI or a literal. Blank nodes are not representable.
class Term {
 public:
  enum class Kind : unsigned char { kIri, kLiteral };

  Term() = default;

  // Throws std::invalid_argument for relative IRIs.
  static Term iri(std::string value);
  // Literal with an explicit datatype; an empty datatype means xsd:string.
  static Term literal(std::string lexical, std::string datatype = {});
  static Term langLiteral(std::string lexical, std::string languageTag);

  Kind kind() const { return kind_; }
  bool isIri() const { return kind_ == Kind::kIri; }
  bool isLiteral() const { return kind_ == Kind::kLiteral; }
  // IRI text for IRIs, lexical form for literals.
  const std::string& value() const { return value_; }
  const std::string& datatype() const { return datatype_; }
  const std::string& language() const { return language_; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;

 private:
  Kind kind_ = Kind::kIri;
  std::string value_;
  std::string datatype_;
  std::string language_;
};

struct Quad {
  Term subject;
  Term predicate;
  Term object;
  Term graph;

  friend bool operator==(const Quad&, const Quad&) = default;
  friend auto operator<=>(const Quad&, const Quad&) = default;
};

Quad makeQuad(std::string_view subject, std::string_view predicate,
              Term object, std::string_view graph);

// A structurally validated nanopublication. Immutable; obtained only via
// assembleNanopub or splitDocument.
class Nanopub {
 public:
  const std::string& uri() const { return uri_; }
  const std::string& headGraph() const { return head_; }
  const std::string& assertionGraph() const { return assertion_; }
  const std::string& provenanceGraph() const { return provenance_; }
  const std::string& pubinfoGraph() const { return pubinfo_; }
  const std::vector<Quad>& quads() const { return quads_; }

  friend bool operator==(const Nanopub&, const Nanopub&) = default;

 private:
  friend Nanopub assembleNanopub(std::vector<Quad>, std::size_t);

  std::string uri_;
  std::string head_;
  std::string assertion_;
  std::string provenance_;
  std::string pubinfo_;
  std::vector<Quad> quads_;
};

// Validates that `quads` form exactly one nanopublication. Throws
// StructureError naming the violated invariant.
Nanopub assembleNanopub(std::vector<Quad> quads,
                        std::size_t maxQuads = kMaxQuadsPerNanopub);

// Partitions a multi-nanopublication document. Nanopublications come out in
// order of their first quad in the input.
std::vector<Nanopub> splitDocument(std::vector<Quad> quads,
                                   std::size_t maxQuads = kMaxQuadsPerNanopub);

}  // namespace nanomesh
