#pragma once

// Bulk hashing kernels. Each element is independent, so the default versions
// split the batch across OpenMP threads; the `serial` namespace holds the
// single-threaded reference the tests and the benchmark compare against.

#include <cstdint>
#include <span>
#include <vector>

#include "nanomesh/rdf.h"
#include "nanomesh/trusty.h"

namespace nanomesh::batch {

std::vector<ArtifactCode> computeCodes(std::span<const Nanopub> nps);

// Rethrows the first failure (in input order) after the whole batch ran.
std::vector<Nanopub> makeTrustyAll(std::span<const Nanopub> nps);

// 1 where verify() holds, 0 where it fails or the code is malformed.
std::vector<std::uint8_t> verifyAll(std::span<const Nanopub> nps);

namespace serial {
std::vector<ArtifactCode> computeCodes(std::span<const Nanopub> nps);
std::vector<Nanopub> makeTrustyAll(std::span<const Nanopub> nps);
std::vector<std::uint8_t> verifyAll(std::span<const Nanopub> nps);
}  // namespace serial

}  // namespace nanomesh::batch
