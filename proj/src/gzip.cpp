#include "nanomesh/gzip.h"

#include <zlib.h>

#include "nanomesh/errors.h"

namespace nanomesh {

namespace {

// gzip wrapper on top of the default 15-bit window.
constexpr int kGzipWindow = 15 + 16;

unsigned char* input(std::string_view data) {
  return reinterpret_cast<unsigned char*>(const_cast<char*>(data.data()));
}

}  // namespace

std::string gzipCompress(std::string_view data, int level) {
  z_stream zs{};
  if (deflateInit2(&zs, level, Z_DEFLATED, kGzipWindow, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error("deflateInit2 failed");
  }
  std::string out(deflateBound(&zs, data.size()), '\0');
  zs.next_in = input(data);
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = reinterpret_cast<unsigned char*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error("deflate failed");
  return out;
}

std::string gzipDecompress(std::string_view data, std::size_t maxOutput) {
  z_stream zs{};
  if (inflateInit2(&zs, kGzipWindow) != Z_OK) throw Error("inflateInit2 failed");
  zs.next_in = input(data);
  zs.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buffer[64 * 1024];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<unsigned char*>(buffer);
    zs.avail_out = sizeof buffer;
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw Error("corrupt gzip data");
    }
    std::size_t produced = sizeof buffer - zs.avail_out;
    if (out.size() + produced > maxOutput) {
      inflateEnd(&zs);
      throw Error("gzip data expands beyond limit");
    }
    out.append(buffer, produced);
    if (rc == Z_OK && produced == 0 && zs.avail_in == 0) {
      inflateEnd(&zs);
      throw Error("truncated gzip data");
    }
  }
  inflateEnd(&zs);
  return out;
}

}  // namespace nanomesh
