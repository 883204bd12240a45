#include "nanomesh/corpus.h"

#include "nanomesh/batch.h"
#include "nanomesh/constants.h"

namespace nanomesh {

namespace {

constexpr std::string_view kEx = "http://example.org/bio/";
constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

constexpr std::string_view kPredicates[] = {
    "associatedWith", "interactsWith", "expressedIn", "regulates",
    "inhibits",       "bindsTo",       "locatedIn",   "partOf",
};

constexpr std::string_view kWords[] = {
    "kinase", "tumor", "suppressor", "cell", "cycle", "protein",
    "binding", "pathway", "gene", "variant", "expression", "assay",
};

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

std::string entity(std::mt19937_64& rng) {
  return std::string(kEx) + "e" + std::to_string(pick(rng, 50000));
}

std::string text(std::mt19937_64& rng) {
  std::string s;
  std::size_t words = 2 + pick(rng, 5);
  for (std::size_t i = 0; i < words; ++i) {
    if (i > 0) s.push_back(' ');
    s += kWords[pick(rng, std::size(kWords))];
  }
  switch (pick(rng, 16)) {
    case 0: s += " \"quoted\""; break;
    case 1: s += "\nsecond line"; break;
    case 2: s += " back\\slash\ttab"; break;
    case 3: s += " \xC3\xA9tude \xE2\x86\x92 \xF0\x9F\xA7\xAC"; break;
    default: break;
  }
  return s;
}

Term object(std::mt19937_64& rng) {
  switch (pick(rng, 4)) {
    case 0:
      return Term::literal(text(rng));
    case 1:
      return Term::langLiteral(text(rng), pick(rng, 2) ? "en" : "de-CH");
    case 2:
      return Term::literal(std::to_string(pick(rng, 100000)),
                           std::string(kXsd) + "integer");
    default:
      return Term::iri(entity(rng));
  }
}

}  // namespace

Nanopub syntheticNanopub(std::mt19937_64& rng, const std::string& pendingUri) {
  const std::string head = pendingUri + "Head";
  const std::string assertion = pendingUri + "assertion";
  const std::string provenance = pendingUri + "provenance";
  const std::string pubinfo = pendingUri + "pubinfo";
  std::vector<Quad> quads;
  quads.push_back(makeQuad(pendingUri, rdf_ns::kType,
                           Term::iri(std::string(np_ns::kNanopublication)), head));
  quads.push_back(makeQuad(pendingUri, np_ns::kHasAssertion,
                           Term::iri(assertion), head));
  quads.push_back(makeQuad(pendingUri, np_ns::kHasProvenance,
                           Term::iri(provenance), head));
  quads.push_back(makeQuad(pendingUri, np_ns::kHasPublicationInfo,
                           Term::iri(pubinfo), head));
  std::size_t statements = 12 + pick(rng, 19);
  for (std::size_t i = 0; i < statements; ++i) {
    std::string predicate = std::string(kEx) +
                            std::string(kPredicates[pick(rng, std::size(kPredicates))]);
    quads.push_back(makeQuad(entity(rng), predicate, object(rng), assertion));
  }
  quads.push_back(makeQuad(assertion, "http://www.w3.org/ns/prov#wasDerivedFrom",
                           Term::iri(std::string(kEx) + "study/" +
                                     std::to_string(pick(rng, 1000))),
                           provenance));
  quads.push_back(makeQuad(assertion, "http://www.w3.org/ns/prov#generatedAtTime",
                           Term::literal("2015-0" + std::to_string(1 + pick(rng, 9)) +
                                             "-1" + std::to_string(pick(rng, 10)),
                                         std::string(kXsd) + "date"),
                           provenance));
  quads.push_back(makeQuad(pendingUri, "http://purl.org/dc/terms/creator",
                           Term::iri("https://orcid.org/0000-0002-" +
                                     std::to_string(1000 + pick(rng, 9000))),
                           pubinfo));
  quads.push_back(makeQuad(pendingUri, "http://purl.org/dc/terms/created",
                           Term::literal("2015-06-" + std::to_string(10 + pick(rng, 19)),
                                         std::string(kXsd) + "date"),
                           pubinfo));
  return assembleNanopub(std::move(quads));
}

std::vector<Nanopub> genCorpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Nanopub> pending;
  pending.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending.push_back(syntheticNanopub(
        rng, "http://example.org/s" + std::to_string(seed) + "/np" +
                 std::to_string(i) + "#"));
  }
  return batch::makeTrustyAll(pending);
}

}  // namespace nanomesh
