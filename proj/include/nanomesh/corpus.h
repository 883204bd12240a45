#pragma once

// Deterministic synthetic nanopublications, standing in for real datasets in
// tests, benchmarks and the experiment harness.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nanomesh/rdf.h"

namespace nanomesh {

// A valid nanopublication with the pending URI `pendingUri` (which must end
// in '#', '/' or '.'), 12-30 assertion statements and 20-38 quads in total.
// Literals occasionally contain characters that need escaping.
Nanopub syntheticNanopub(std::mt19937_64& rng, const std::string& pendingUri);

// `n` trusty nanopublications. The same (n, seed) always yields the same
// artifact codes.
std::vector<Nanopub> genCorpus(std::size_t n, std::uint64_t seed);

}  // namespace nanomesh
