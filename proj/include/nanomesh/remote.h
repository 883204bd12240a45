#pragma once

// Typed calls against a remote server. `server` is a normalized server URL
// (trailing slash). All functions throw FetchError on transport failures and
// unexpected statuses.

#include <optional>
#include <string>
#include <vector>

#include "nanomesh/store.h"
#include "nanomesh/transport.h"
#include "nanomesh/wire.h"

namespace nanomesh::remote {

std::string nanopubUrl(const std::string& server, const ArtifactCode& code);

ServerInfo fetchInfo(Transport& transport, const std::string& server);

// Unverified; nullopt on 404. Throws FetchError for unparsable bodies.
std::optional<Nanopub> fetchNanopub(Transport& transport, const std::string& server,
                                    const ArtifactCode& code);

// Throws FetchError on 404 and VerificationError when the content does not
// carry `code` or does not hash to it.
Nanopub fetchVerified(Transport& transport, const std::string& server,
                      const ArtifactCode& code);

std::vector<ArtifactCode> fetchPage(Transport& transport, const std::string& server,
                                    std::uint64_t page);

// Decompressed and split; items are not verified.
std::vector<PackageItem> fetchPackage(Transport& transport, const std::string& server,
                                      std::uint64_t page);

std::vector<std::string> fetchPeers(Transport& transport, const std::string& server);

// Returns the HTTP status.
int postNanopub(Transport& transport, const std::string& server, const Nanopub& np);
int postPeer(Transport& transport, const std::string& server, const std::string& url);

}  // namespace nanomesh::remote
