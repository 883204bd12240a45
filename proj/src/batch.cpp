#include "nanomesh/batch.h"

#include <exception>
#include <optional>

#include "nanomesh/errors.h"

namespace nanomesh::batch {

namespace {

bool verifies(const Nanopub& np) {
  try {
    return verify(np);
  } catch (const Error&) {
    return false;
  }
}

// Runs fn(i) for every index on the OpenMP team and rethrows the lowest
// failing index's exception afterwards.
template <typename Fn>
void parallelFor(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<ArtifactCode> computeCodes(std::span<const Nanopub> nps) {
  std::vector<std::optional<ArtifactCode>> slots(nps.size());
  parallelFor(nps.size(), [&](std::size_t i) { slots[i] = computeCode(nps[i]); });
  std::vector<ArtifactCode> codes;
  codes.reserve(nps.size());
  for (auto& s : slots) codes.push_back(std::move(*s));
  return codes;
}

std::vector<Nanopub> makeTrustyAll(std::span<const Nanopub> nps) {
  std::vector<std::optional<Nanopub>> slots(nps.size());
  parallelFor(nps.size(), [&](std::size_t i) { slots[i] = makeTrusty(nps[i]); });
  std::vector<Nanopub> out;
  out.reserve(nps.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::vector<std::uint8_t> verifyAll(std::span<const Nanopub> nps) {
  std::vector<std::uint8_t> ok(nps.size(), 0);
  const auto count = static_cast<std::ptrdiff_t>(nps.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    ok[static_cast<std::size_t>(i)] = verifies(nps[static_cast<std::size_t>(i)]);
  }
  return ok;
}

namespace serial {

std::vector<ArtifactCode> computeCodes(std::span<const Nanopub> nps) {
  std::vector<ArtifactCode> codes;
  codes.reserve(nps.size());
  for (const Nanopub& np : nps) codes.push_back(computeCode(np));
  return codes;
}

std::vector<Nanopub> makeTrustyAll(std::span<const Nanopub> nps) {
  std::vector<Nanopub> out;
  out.reserve(nps.size());
  for (const Nanopub& np : nps) out.push_back(makeTrusty(np));
  return out;
}

std::vector<std::uint8_t> verifyAll(std::span<const Nanopub> nps) {
  std::vector<std::uint8_t> ok;
  ok.reserve(nps.size());
  for (const Nanopub& np : nps) ok.push_back(verifies(np));
  return ok;
}

}  // namespace serial

}  // namespace nanomesh::batch
