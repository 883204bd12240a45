#pragma once

// gzip framing over zlib. Compression is deterministic (no timestamp, fixed
// level), so the same input always yields the same bytes.

#include <cstddef>
#include <string>
#include <string_view>

namespace nanomesh {

std::string gzipCompress(std::string_view data, int level = 6);

// Throws Error on corrupt input or when the output would exceed `maxOutput`.
std::string gzipDecompress(std::string_view data,
                           std::size_t maxOutput = std::size_t{1} << 30);

}  // namespace nanomesh
