#pragma once

// Shared constants: structural vocabularies, size limits and defaults.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace nanomesh {

namespace rdf_ns {
inline constexpr std::string_view kType =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kLangString =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
inline constexpr std::string_view kXsdString =
    "http://www.w3.org/2001/XMLSchema#string";
}  // namespace rdf_ns

// Nanopublication schema. These are the predicates that tie the head graph
// to the three content graphs.
namespace np_ns {
inline constexpr std::string_view kNanopublication =
    "http://www.nanopub.org/nschema#Nanopublication";
inline constexpr std::string_view kHasAssertion =
    "http://www.nanopub.org/nschema#hasAssertion";
inline constexpr std::string_view kHasProvenance =
    "http://www.nanopub.org/nschema#hasProvenance";
inline constexpr std::string_view kHasPublicationInfo =
    "http://www.nanopub.org/nschema#hasPublicationInfo";
}  // namespace np_ns

// Index vocabulary. Frozen: changing any of these changes every index code.
//
//   hasElement       (assertion graph)  index -> member nanopublication
//   hasSubIndex      (assertion graph)  index -> nested index
//   appendsTo        (pubinfo graph)    index -> previous index of a chain
//   Index            (pubinfo graph)    rdf:type of every index
//   IncompleteIndex  (pubinfo graph)    rdf:type of non-final chain links
namespace index_ns {
inline constexpr std::string_view kHasElement =
    "https://w3id.org/nanomesh/vocab#hasElement";
inline constexpr std::string_view kHasSubIndex =
    "https://w3id.org/nanomesh/vocab#hasSubIndex";
inline constexpr std::string_view kAppendsTo =
    "https://w3id.org/nanomesh/vocab#appendsTo";
inline constexpr std::string_view kIndex =
    "https://w3id.org/nanomesh/vocab#Index";
inline constexpr std::string_view kIncompleteIndex =
    "https://w3id.org/nanomesh/vocab#IncompleteIndex";
inline constexpr std::string_view kTitle = "http://purl.org/dc/terms/title";
inline constexpr std::string_view kWasAttributedTo =
    "http://www.w3.org/ns/prov#wasAttributedTo";
inline constexpr std::string_view kDefaultCreator =
    "https://w3id.org/nanomesh/agent/np";
}  // namespace index_ns

inline constexpr std::size_t kMaxQuadsPerNanopub = 1200;
inline constexpr std::size_t kMaxIndexRefs = 1000;
inline constexpr std::size_t kDefaultPageSize = 1000;
inline constexpr std::size_t kMaxPostBytes = 1 << 20;

inline constexpr std::string_view kModuleId = "RA";
inline constexpr std::size_t kDigestChars = 43;
inline constexpr std::size_t kArtifactCodeLength = 45;
inline constexpr std::string_view kCodeAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

inline constexpr std::string_view kProtocolVersion = "nanomesh/1";

}  // namespace nanomesh
