#include "nanomesh/rdf.h"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "nanomesh/errors.h"

namespace nanomesh {

namespace {

bool isAlpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool isDigit(char c) { return c >= '0' && c <= '9'; }

bool isTypeStatement(const Quad& q) {
  return q.predicate.value() == rdf_ns::kType && q.object.isIri() &&
         q.object.value() == np_ns::kNanopublication;
}

}  // namespace

bool isAbsoluteIri(std::string_view iri) {
  if (iri.empty() || !isAlpha(iri.front())) return false;
  for (std::size_t i = 1; i < iri.size(); ++i) {
    char c = iri[i];
    if (c == ':') return true;
    if (!isAlpha(c) && !isDigit(c) && c != '+' && c != '-' && c != '.') {
      return false;
    }
  }
  return false;
}

Term Term::iri(std::string value) {
  if (!isAbsoluteIri(value)) {
    throw std::invalid_argument("relative IRI: " + value);
  }
  Term t;
  t.kind_ = Kind::kIri;
  t.value_ = std::move(value);
  return t;
}

Term Term::literal(std::string lexical, std::string datatype) {
  if (datatype.empty()) datatype = std::string(rdf_ns::kXsdString);
  if (datatype == rdf_ns::kLangString) {
    throw std::invalid_argument("language-tagged literal without a tag");
  }
  if (!isAbsoluteIri(datatype)) {
    throw std::invalid_argument("relative datatype IRI: " + datatype);
  }
  Term t;
  t.kind_ = Kind::kLiteral;
  t.value_ = std::move(lexical);
  t.datatype_ = std::move(datatype);
  return t;
}

Term Term::langLiteral(std::string lexical, std::string languageTag) {
  if (languageTag.empty()) {
    throw std::invalid_argument("empty language tag");
  }
  Term t;
  t.kind_ = Kind::kLiteral;
  t.value_ = std::move(lexical);
  t.datatype_ = std::string(rdf_ns::kLangString);
  t.language_ = std::move(languageTag);
  return t;
}

Quad makeQuad(std::string_view subject, std::string_view predicate,
              Term object, std::string_view graph) {
  return Quad{Term::iri(std::string(subject)), Term::iri(std::string(predicate)),
              std::move(object), Term::iri(std::string(graph))};
}

Nanopub assembleNanopub(std::vector<Quad> quads, std::size_t maxQuads) {
  if (quads.size() > maxQuads) {
    throw StructureError("nanopublication has " + std::to_string(quads.size()) +
                         " quads, above the cap of " + std::to_string(maxQuads));
  }
  const Quad* typeQuad = nullptr;
  for (const Quad& q : quads) {
    if (!isTypeStatement(q)) continue;
    if (typeQuad != nullptr) {
      throw StructureError("duplicate head graph: " + typeQuad->graph.value() +
                           " and " + q.graph.value());
    }
    typeQuad = &q;
  }
  if (typeQuad == nullptr) throw StructureError("missing head graph");

  Nanopub np;
  np.uri_ = typeQuad->subject.value();
  np.head_ = typeQuad->graph.value();

  // name of the linking predicate -> slot
  std::array<std::pair<std::string_view, std::string*>, 3> links{{
      {np_ns::kHasAssertion, &np.assertion_},
      {np_ns::kHasProvenance, &np.provenance_},
      {np_ns::kHasPublicationInfo, &np.pubinfo_},
  }};
  std::size_t headCount = 0;
  for (const Quad& q : quads) {
    if (q.graph.value() != np.head_) continue;
    ++headCount;
    if (q.subject.value() != np.uri_) {
      throw StructureError("head graph statement about " + q.subject.value() +
                           " instead of " + np.uri_);
    }
    if (&q == typeQuad) continue;
    auto it = std::find_if(links.begin(), links.end(), [&](const auto& l) {
      return l.first == q.predicate.value();
    });
    if (it == links.end() || !q.object.isIri()) {
      throw StructureError("unexpected head graph statement with predicate " +
                           q.predicate.value());
    }
    if (!it->second->empty()) {
      throw StructureError("duplicate head link " + q.predicate.value());
    }
    *it->second = q.object.value();
  }
  for (const auto& [predicate, slot] : links) {
    if (slot->empty()) {
      throw StructureError("head graph lacks " + std::string(predicate));
    }
  }
  if (headCount != 4) throw StructureError("malformed head graph");

  const std::array<const std::string*, 4> graphs{&np.head_, &np.assertion_,
                                                 &np.provenance_, &np.pubinfo_};
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    for (std::size_t j = i + 1; j < graphs.size(); ++j) {
      if (*graphs[i] == *graphs[j]) {
        throw StructureError("graph IRI used twice: " + *graphs[i]);
      }
    }
  }
  std::array<std::size_t, 4> counts{};
  for (const Quad& q : quads) {
    auto it = std::find_if(graphs.begin(), graphs.end(), [&](const auto* g) {
      return *g == q.graph.value();
    });
    if (it == graphs.end()) {
      throw StructureError("foreign graph " + q.graph.value());
    }
    ++counts[static_cast<std::size_t>(it - graphs.begin())];
  }
  if (counts[1] == 0) throw StructureError("empty assertion graph");
  if (counts[2] == 0) throw StructureError("empty provenance graph");
  if (counts[3] == 0) throw StructureError("empty pubinfo graph");

  np.quads_ = std::move(quads);
  return np;
}

std::vector<Nanopub> splitDocument(std::vector<Quad> quads,
                                   std::size_t maxQuads) {
  // graph IRI -> owning nanopub slot
  std::unordered_map<std::string, std::size_t> owner;
  std::unordered_map<std::string, std::string> headUri;
  std::vector<std::string> heads;
  for (const Quad& q : quads) {
    if (!isTypeStatement(q)) continue;
    if (headUri.emplace(q.graph.value(), q.subject.value()).second) {
      heads.push_back(q.graph.value());
    }
  }
  auto claim = [&](const std::string& graph, std::size_t slot) {
    auto [it, inserted] = owner.emplace(graph, slot);
    if (!inserted && it->second != slot) {
      throw StructureError("graph " + graph +
                           " claimed by more than one nanopublication");
    }
  };
  for (std::size_t i = 0; i < heads.size(); ++i) claim(heads[i], i);
  for (const Quad& q : quads) {
    auto h = headUri.find(q.graph.value());
    if (h == headUri.end() || q.subject.value() != h->second) continue;
    const auto& p = q.predicate.value();
    if ((p == np_ns::kHasAssertion || p == np_ns::kHasProvenance ||
         p == np_ns::kHasPublicationInfo) &&
        q.object.isIri()) {
      claim(q.object.value(), owner.at(q.graph.value()));
    }
  }

  std::vector<std::vector<Quad>> parts(heads.size());
  std::vector<std::size_t> order;
  std::vector<bool> seen(heads.size(), false);
  for (Quad& q : quads) {
    auto it = owner.find(q.graph.value());
    if (it == owner.end()) {
      throw StructureError("orphan quad in graph " + q.graph.value());
    }
    if (!seen[it->second]) {
      seen[it->second] = true;
      order.push_back(it->second);
    }
    parts[it->second].push_back(std::move(q));
  }
  std::vector<Nanopub> result;
  result.reserve(order.size());
  for (std::size_t slot : order) {
    result.push_back(assembleNanopub(std::move(parts[slot]), maxQuads));
  }
  return result;
}

}  // namespace nanomesh
