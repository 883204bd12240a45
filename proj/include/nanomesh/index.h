#pragma once

// Nanopublication indexes: collections named by reference, never by
// containment. An index lists elements and sub-indexes in its assertion graph
// and may append to an earlier index (pubinfo graph), so arbitrarily large
// sets are expressed as chains of nodes with at most 1000 references each.

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nanomesh/constants.h"
#include "nanomesh/rdf.h"
#include "nanomesh/trusty.h"

namespace nanomesh {

struct IndexNode {
  Nanopub nanopub;
  std::vector<TrustyUri> elements;
  std::vector<TrustyUri> subIndexes;
  std::optional<TrustyUri> appendsTo;
  std::optional<std::string> title;
  bool incomplete = false;

  TrustyUri uri() const { return TrustyUri::parse(nanopub.uri()); }
};

struct IndexOptions {
  // Pending URI of new index nanopublications; must end in '#', '/' or '.'.
  std::string baseUri = "http://example.org/np/";
  std::string creator = std::string(index_ns::kDefaultCreator);
};

// One trusty index nanopublication. Throws StructureError above
// kMaxIndexRefs elements.
IndexNode makeIndexNode(std::span<const TrustyUri> elements,
                        std::span<const TrustyUri> subIndexes,
                        const std::optional<TrustyUri>& appendsTo,
                        const std::optional<std::string>& title,
                        bool incomplete, const IndexOptions& options = {});

// ceil(n / 1000) nodes, each appending to its predecessor. Duplicates are
// dropped (first occurrence wins). The final node carries the title and
// stands for the whole set. Throws StructureError on empty input and
// MalformedCodeError on element URIs without an artifact code.
std::vector<IndexNode> buildIndexChain(std::span<const std::string> elementUris,
                                       const std::optional<std::string>& title,
                                       const IndexOptions& options = {});

// Throws TrustyError for nanopublications without a verifying code.
std::vector<IndexNode> buildIndexFromNanopubs(
    std::span<const Nanopub> nps, const std::optional<std::string>& title,
    const IndexOptions& options = {});

bool isIndex(const Nanopub& np);

// Throws StructureError if `np` is not an index.
IndexNode readIndexNode(const Nanopub& np);

struct ResolvedSet {
  TrustyUri root;
  // Element URIs, deduplicated, in first-appearance order.
  std::vector<TrustyUri> members;
  std::set<std::string> visitedIndexes;
  bool cycleDetected = false;
};

using FetchFn = std::function<Nanopub(const TrustyUri&)>;

// Walks appendsTo, then the node's own elements, then its sub-indexes, so a
// chain resolves in insertion order. Fetches are issued one at a time. Throws
// FetchError (fetch failed or content does not verify) and StructureError
// (a non-index where an index is required). Cycles end the walk silently and
// set cycleDetected.
ResolvedSet resolveIndex(const TrustyUri& root, const FetchFn& fetch);

}  // namespace nanomesh
