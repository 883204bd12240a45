#include "nanomesh/remote.h"

#include "nanomesh/errors.h"
#include "nanomesh/gzip.h"

namespace nanomesh::remote {

namespace {

// Upper bound for a decompressed package; far above 1000 capped nanopubs.
constexpr std::size_t kMaxPackageBytes = std::size_t{1} << 30;

TransportResponse expectOk(TransportResponse response, const std::string& url) {
  if (response.status != 200) {
    throw FetchError(url, "HTTP status " + std::to_string(response.status));
  }
  return response;
}

}  // namespace

std::string nanopubUrl(const std::string& server, const ArtifactCode& code) {
  return server + "np/" + code.str();
}

ServerInfo fetchInfo(Transport& transport, const std::string& server) {
  auto response = expectOk(transport.get(server), server);
  try {
    return parseInfo(response.body);
  } catch (const Error& err) {
    throw FetchError(server, err.what());
  }
}

std::optional<Nanopub> fetchNanopub(Transport& transport, const std::string& server,
                                    const ArtifactCode& code) {
  std::string url = nanopubUrl(server, code);
  auto response = transport.get(url, "application/n-quads");
  if (response.status == 404) return std::nullopt;
  if (response.status != 200) {
    throw FetchError(url, "HTTP status " + std::to_string(response.status));
  }
  try {
    return parseNanopubBytes(response.body);
  } catch (const Error& err) {
    throw FetchError(url, err.what());
  }
}

Nanopub fetchVerified(Transport& transport, const std::string& server,
                      const ArtifactCode& code) {
  auto np = fetchNanopub(transport, server, code);
  std::string url = nanopubUrl(server, code);
  if (!np) throw FetchError(url, "not found");
  bool ok = false;
  try {
    ok = verifyAs(*np, code);
  } catch (const Error&) {
    ok = false;
  }
  if (!ok) throw VerificationError(url, "content does not verify");
  return std::move(*np);
}

std::vector<ArtifactCode> fetchPage(Transport& transport, const std::string& server,
                                    std::uint64_t page) {
  std::string url = server + "journal/" + std::to_string(page);
  auto response = expectOk(transport.get(url), url);
  try {
    return parsePageListing(response.body);
  } catch (const Error& err) {
    throw FetchError(url, err.what());
  }
}

std::vector<PackageItem> fetchPackage(Transport& transport, const std::string& server,
                                      std::uint64_t page) {
  std::string url = server + "package/" + std::to_string(page);
  auto response = expectOk(transport.get(url), url);
  try {
    bool gzipped = response.contentEncoding == "gzip" ||
                   (response.body.size() >= 2 &&
                    static_cast<unsigned char>(response.body[0]) == 0x1f &&
                    static_cast<unsigned char>(response.body[1]) == 0x8b);
    std::string text =
        gzipped ? gzipDecompress(response.body, kMaxPackageBytes) : std::move(response.body);
    return splitPackage(text);
  } catch (const Error& err) {
    throw FetchError(url, err.what());
  }
}

std::vector<std::string> fetchPeers(Transport& transport, const std::string& server) {
  std::string url = server + "peers";
  return parsePeerList(expectOk(transport.get(url), url).body);
}

int postNanopub(Transport& transport, const std::string& server, const Nanopub& np) {
  return transport.post(server + "np", canonicalBytes(np), "application/n-quads").status;
}

int postPeer(Transport& transport, const std::string& server, const std::string& url) {
  return transport.post(server + "peers", url, "text/plain").status;
}

}  // namespace nanomesh::remote
