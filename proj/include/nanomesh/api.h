#pragma once

// Request handling for the server protocol, independent of the HTTP library
// so it can be exercised directly and through an in-memory transport.
//
//   GET  /                 server info
//   GET  /np/{code}        one nanopub; also GET /{code}, so trusty URIs
//                          minted under the public URL resolve directly
//   GET  /journal/{page}   trusty URIs of a journal page (1-indexed)
//   GET  /package/{page}   gzipped package of a complete page
//   GET  /peers            known peers
//   POST /np               add one trusty nanopub
//   POST /peers            add one peer URL

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "nanomesh/peers.h"
#include "nanomesh/rdf_io.h"
#include "nanomesh/store.h"

namespace nanomesh {

inline constexpr std::string_view kLineQuadsType = "application/n-quads";
inline constexpr std::string_view kGroupedGraphsType = "application/trig";

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;

  std::string header(const std::string& name) const;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string contentType = "text/plain; charset=utf-8";
  std::string contentEncoding;
};

struct Negotiated {
  Format format;
  std::string mediaType;
};
// Picks the best supported media type from an Accept header; an empty
// header selects line quads. nullopt means 406.
std::optional<Negotiated> negotiate(std::string_view accept);

class Api {
 public:
  Api(Store& store, PeerSet& peers, std::string publicUrl, bool acceptsPosts);

  // Never throws; unexpected failures become 500.
  HttpResponse handle(const HttpRequest& request) const;

  HttpResponse getInfo() const;
  HttpResponse getNanopub(std::string_view code, std::string_view accept) const;
  HttpResponse getPage(std::string_view page) const;
  HttpResponse getPackage(std::string_view page) const;
  HttpResponse getPeers() const;
  HttpResponse postNanopub(std::string_view body, std::string_view contentType) const;
  HttpResponse postPeer(std::string_view body) const;

  const std::string& publicUrl() const { return publicUrl_; }

 private:
  Store& store_;
  PeerSet& peers_;
  std::string publicUrl_;
  bool acceptsPosts_;
};

}  // namespace nanomesh
