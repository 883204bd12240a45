#include "nanomesh/index.h"

#include <unordered_set>
#include <variant>

#include "nanomesh/errors.h"

namespace nanomesh {

namespace {

Term iri(std::string_view s) { return Term::iri(std::string(s)); }

}  // namespace

IndexNode makeIndexNode(std::span<const TrustyUri> elements,
                        std::span<const TrustyUri> subIndexes,
                        const std::optional<TrustyUri>& appendsTo,
                        const std::optional<std::string>& title,
                        bool incomplete, const IndexOptions& options) {
  if (elements.size() > kMaxIndexRefs) {
    throw StructureError("an index holds at most " +
                         std::to_string(kMaxIndexRefs) + " elements, got " +
                         std::to_string(elements.size()));
  }
  const std::string& uri = options.baseUri;
  const std::string head = uri + "Head";
  const std::string assertion = uri + "assertion";
  const std::string provenance = uri + "provenance";
  const std::string pubinfo = uri + "pubinfo";

  std::vector<Quad> quads;
  quads.reserve(elements.size() + subIndexes.size() + 10);
  quads.push_back(makeQuad(uri, rdf_ns::kType, iri(np_ns::kNanopublication), head));
  quads.push_back(makeQuad(uri, np_ns::kHasAssertion, iri(assertion), head));
  quads.push_back(makeQuad(uri, np_ns::kHasProvenance, iri(provenance), head));
  quads.push_back(makeQuad(uri, np_ns::kHasPublicationInfo, iri(pubinfo), head));
  for (const TrustyUri& e : elements) {
    quads.push_back(makeQuad(uri, index_ns::kHasElement, iri(e.str()), assertion));
  }
  for (const TrustyUri& s : subIndexes) {
    quads.push_back(makeQuad(uri, index_ns::kHasSubIndex, iri(s.str()), assertion));
  }
  if (elements.empty() && subIndexes.empty()) {
    // the assertion graph may not be empty
    quads.push_back(makeQuad(uri, rdf_ns::kType, iri(index_ns::kIndex), assertion));
  }
  quads.push_back(makeQuad(assertion, index_ns::kWasAttributedTo,
                           iri(options.creator), provenance));
  quads.push_back(makeQuad(uri, rdf_ns::kType, iri(index_ns::kIndex), pubinfo));
  if (incomplete) {
    quads.push_back(
        makeQuad(uri, rdf_ns::kType, iri(index_ns::kIncompleteIndex), pubinfo));
  }
  if (appendsTo) {
    quads.push_back(
        makeQuad(uri, index_ns::kAppendsTo, iri(appendsTo->str()), pubinfo));
  }
  if (title) {
    quads.push_back(makeQuad(uri, index_ns::kTitle, Term::literal(*title), pubinfo));
  }
  Nanopub np = makeTrusty(assembleNanopub(std::move(quads)));
  return readIndexNode(np);
}

std::vector<IndexNode> buildIndexChain(std::span<const std::string> elementUris,
                                       const std::optional<std::string>& title,
                                       const IndexOptions& options) {
  if (elementUris.empty()) throw StructureError("index without elements");
  std::vector<TrustyUri> elements;
  std::unordered_set<std::string> seen;
  for (const std::string& uri : elementUris) {
    TrustyUri parsed = TrustyUri::parse(uri);
    if (seen.insert(uri).second) elements.push_back(std::move(parsed));
  }
  std::vector<IndexNode> chain;
  std::optional<TrustyUri> previous;
  for (std::size_t begin = 0; begin < elements.size(); begin += kMaxIndexRefs) {
    std::size_t end = std::min(begin + kMaxIndexRefs, elements.size());
    bool last = end == elements.size();
    chain.push_back(makeIndexNode(
        std::span(elements).subspan(begin, end - begin), {}, previous,
        last ? title : std::nullopt, !last, options));
    previous = chain.back().uri();
  }
  return chain;
}

std::vector<IndexNode> buildIndexFromNanopubs(
    std::span<const Nanopub> nps, const std::optional<std::string>& title,
    const IndexOptions& options) {
  std::vector<std::string> uris;
  uris.reserve(nps.size());
  for (const Nanopub& np : nps) {
    bool ok = false;
    try {
      ok = verify(np);
    } catch (const MalformedCodeError&) {
    }
    if (!ok) throw TrustyError("not a verifying trusty nanopublication: " + np.uri());
    uris.push_back(np.uri());
  }
  return buildIndexChain(uris, title, options);
}

bool isIndex(const Nanopub& np) {
  for (const Quad& q : np.quads()) {
    if (q.graph.value() == np.pubinfoGraph() && q.subject.value() == np.uri() &&
        q.predicate.value() == rdf_ns::kType && q.object.isIri() &&
        q.object.value() == index_ns::kIndex) {
      return true;
    }
  }
  return false;
}

IndexNode readIndexNode(const Nanopub& np) {
  if (!isIndex(np)) throw StructureError("not an index: " + np.uri());
  IndexNode node{np, {}, {}, std::nullopt, std::nullopt, false};
  for (const Quad& q : np.quads()) {
    if (q.subject.value() != np.uri()) continue;
    const std::string& p = q.predicate.value();
    const std::string& g = q.graph.value();
    if (g == np.assertionGraph() && p == index_ns::kHasElement) {
      node.elements.push_back(TrustyUri::parse(q.object.value()));
    } else if (g == np.assertionGraph() && p == index_ns::kHasSubIndex) {
      node.subIndexes.push_back(TrustyUri::parse(q.object.value()));
    } else if (g == np.pubinfoGraph() && p == index_ns::kAppendsTo) {
      if (node.appendsTo) throw StructureError("index appends to two indexes");
      node.appendsTo = TrustyUri::parse(q.object.value());
    } else if (g == np.pubinfoGraph() && p == index_ns::kTitle) {
      node.title = q.object.value();
    } else if (g == np.pubinfoGraph() && p == rdf_ns::kType &&
               q.object.value() == index_ns::kIncompleteIndex) {
      node.incomplete = true;
    }
  }
  if (node.elements.size() > kMaxIndexRefs) {
    throw StructureError("index " + np.uri() + " exceeds " +
                         std::to_string(kMaxIndexRefs) + " elements");
  }
  return node;
}

ResolvedSet resolveIndex(const TrustyUri& root, const FetchFn& fetch) {
  struct Visit { TrustyUri uri; };
  struct Leave { std::string uri; };
  struct Emit { TrustyUri uri; };
  using Step = std::variant<Visit, Leave, Emit>;

  ResolvedSet result{root, {}, {}, false};
  std::unordered_set<std::string> onPath;
  std::unordered_set<std::string> emitted;
  std::vector<Step> stack;
  stack.push_back(Visit{root});
  while (!stack.empty()) {
    Step step = std::move(stack.back());
    stack.pop_back();
    if (auto* emit = std::get_if<Emit>(&step)) {
      if (emitted.insert(emit->uri.str()).second) {
        result.members.push_back(std::move(emit->uri));
      }
      continue;
    }
    if (auto* leave = std::get_if<Leave>(&step)) {
      onPath.erase(leave->uri);
      continue;
    }
    const TrustyUri& uri = std::get<Visit>(step).uri;
    const std::string key = uri.str();
    if (onPath.contains(key)) {
      result.cycleDetected = true;
      continue;
    }
    if (result.visitedIndexes.contains(key)) continue;  // shared sub-index

    Nanopub np = fetch(uri);
    bool ok = false;
    try {
      ok = verifyAs(np, uri.code);
    } catch (const Error&) {
    }
    if (!ok) throw FetchError(key, "content does not verify");
    IndexNode node = readIndexNode(np);
    result.visitedIndexes.insert(key);
    onPath.insert(key);

    // Pushed in reverse: appended index first, then elements, then subs.
    stack.push_back(Leave{key});
    for (auto it = node.subIndexes.rbegin(); it != node.subIndexes.rend(); ++it) {
      stack.push_back(Visit{*it});
    }
    for (auto it = node.elements.rbegin(); it != node.elements.rend(); ++it) {
      stack.push_back(Emit{*it});
    }
    if (node.appendsTo) stack.push_back(Visit{*node.appendsTo});
  }
  return result;
}

}  // namespace nanomesh
