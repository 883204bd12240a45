#include "nanomesh/api.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <charconv>

#include "nanomesh/errors.h"
#include "nanomesh/wire.h"

namespace nanomesh {

namespace {

HttpResponse text(int status, std::string body) {
  HttpResponse r;
  r.status = status;
  r.body = std::move(body);
  return r;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// nullopt for non-numeric input; 0 stays 0 so the caller can 404 it.
std::optional<std::uint64_t> pageNumber(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return value;
}

std::optional<Negotiated> supported(const std::string& type) {
  if (type == kLineQuadsType || type == "*/*" || type == "application/*") {
    return Negotiated{Format::kLineQuads, std::string(kLineQuadsType)};
  }
  if (type == "text/plain" || type == "text/*") {
    return Negotiated{Format::kLineQuads, "text/plain"};
  }
  if (type == kGroupedGraphsType) {
    return Negotiated{Format::kGroupedGraphs, std::string(kGroupedGraphsType)};
  }
  return std::nullopt;
}

}  // namespace

std::string HttpRequest::header(const std::string& name) const {
  auto it = headers.find(name);
  return it == headers.end() ? std::string() : it->second;
}

std::optional<Negotiated> negotiate(std::string_view accept) {
  if (trim(accept).empty()) return Negotiated{Format::kLineQuads, std::string(kLineQuadsType)};
  std::optional<Negotiated> best;
  double bestQ = 0;
  while (!accept.empty()) {
    std::size_t comma = accept.find(',');
    std::string_view range = accept.substr(0, comma);
    accept.remove_prefix(comma == std::string_view::npos ? accept.size() : comma + 1);
    std::size_t semi = range.find(';');
    std::string type = lower(trim(range.substr(0, semi)));
    double q = 1;
    while (semi != std::string_view::npos) {
      range.remove_prefix(semi + 1);
      semi = range.find(';');
      std::string_view param = trim(range.substr(0, semi));
      if (param.starts_with("q=")) {
        try {
          q = std::stod(std::string(param.substr(2)));
        } catch (const std::exception&) {
          q = 0;
        }
      }
    }
    auto candidate = supported(type);
    if (candidate && q > bestQ) {
      best = candidate;
      bestQ = q;
    }
  }
  return best;
}

Api::Api(Store& store, PeerSet& peers, std::string publicUrl, bool acceptsPosts)
    : store_(store),
      peers_(peers),
      publicUrl_(std::move(publicUrl)),
      acceptsPosts_(acceptsPosts) {}

HttpResponse Api::handle(const HttpRequest& request) const {
  try {
    std::string_view path = request.path;
    const bool isGet = request.method == "GET" || request.method == "HEAD";
    const bool isPost = request.method == "POST";
    auto segment = [&](std::string_view prefix) -> std::optional<std::string_view> {
      if (!path.starts_with(prefix)) return std::nullopt;
      std::string_view rest = path.substr(prefix.size());
      if (rest.empty() || rest.find('/') != std::string_view::npos) return std::nullopt;
      return rest;
    };
    auto methodNotAllowed = [] { return text(405, "method not allowed\n"); };

    if (path == "/") return isGet ? getInfo() : methodNotAllowed();
    if (path == "/peers") {
      if (isGet) return getPeers();
      if (isPost) return postPeer(request.body);
      return methodNotAllowed();
    }
    if (path == "/np" || path == "/np/") {
      return isPost ? postNanopub(request.body, request.header("content-type"))
                    : methodNotAllowed();
    }
    if (auto code = segment("/np/")) {
      return isGet ? getNanopub(*code, request.header("accept")) : methodNotAllowed();
    }
    if (auto page = segment("/journal/")) return isGet ? getPage(*page) : methodNotAllowed();
    if (auto page = segment("/package/")) return isGet ? getPackage(*page) : methodNotAllowed();
    if (auto code = segment("/"); code && code->starts_with(kModuleId)) {
      return isGet ? getNanopub(*code, request.header("accept")) : methodNotAllowed();
    }
    return text(404, "not found\n");
  } catch (const std::exception& err) {
    spdlog::error("{} {} failed: {}", request.method, request.path, err.what());
    return text(500, "internal error\n");
  }
}

HttpResponse Api::getInfo() const {
  StoreInfo info = store_.info();
  return text(200, renderInfo(ServerInfo{std::string(kProtocolVersion), info.journalId,
                                         info.nanopubCount, info.pageSize, acceptsPosts_,
                                         publicUrl_}));
}

HttpResponse Api::getNanopub(std::string_view code, std::string_view accept) const {
  auto parsed = ArtifactCode::tryParse(code);
  if (!parsed) return text(400, "malformed artifact code\n");
  auto negotiated = negotiate(accept);
  if (!negotiated) {
    return text(406, std::string("supported types: ") + std::string(kLineQuadsType) +
                         ", text/plain, " + std::string(kGroupedGraphsType) + "\n");
  }
  auto entry = store_.get(*parsed);
  if (!entry) return text(404, "unknown nanopublication\n");
  HttpResponse r;
  r.contentType = negotiated->mediaType + "; charset=utf-8";
  if (negotiated->format == Format::kLineQuads) {
    r.body = std::move(entry->bytes);
  } else {
    r.body = serializeQuads(parseNanopubBytes(entry->bytes).quads(), Format::kGroupedGraphs);
  }
  return r;
}

HttpResponse Api::getPage(std::string_view page) const {
  auto number = pageNumber(page);
  if (!number) return text(400, "page must be a number\n");
  try {
    JournalPage p = store_.getPage(*number);
    return text(200, renderPageListing(publicUrl_, p.entries));
  } catch (const NotFoundError& err) {
    return text(404, std::string(err.what()) + "\n");
  }
}

HttpResponse Api::getPackage(std::string_view page) const {
  auto number = pageNumber(page);
  if (!number) return text(400, "page must be a number\n");
  try {
    HttpResponse r;
    r.body = store_.getPackage(*number);
    r.contentType = std::string(kLineQuadsType) + "; charset=utf-8";
    r.contentEncoding = "gzip";
    return r;
  } catch (const NotFoundError& err) {
    return text(404, std::string(err.what()) + "\n");
  }
}

HttpResponse Api::getPeers() const {
  return text(200, renderUrlList(peers_.list()));
}

HttpResponse Api::postNanopub(std::string_view body, std::string_view contentType) const {
  if (!acceptsPosts_) return text(405, "this server does not accept nanopublications\n");
  if (body.size() > kMaxPostBytes) return text(413, "nanopublication too large\n");
  Format format = lower(contentType).starts_with(kGroupedGraphsType) ? Format::kGroupedGraphs
                                                                     : Format::kLineQuads;
  Nanopub np;
  try {
    auto nps = splitDocument(parseQuads(body, format));
    if (nps.size() != 1) {
      return text(400, "expected exactly one nanopublication, got " +
                           std::to_string(nps.size()) + "\n");
    }
    np = std::move(nps.front());
    // The code is recomputed here; the client's claim is never trusted.
    if (!verify(np)) return text(400, "nanopublication does not verify\n");
  } catch (const Error& err) {
    return text(400, std::string(err.what()) + "\n");
  }
  PutResult result = store_.put(np);
  spdlog::debug("POST /np {} {}", np.uri(), result.added ? "added" : "present");
  return text(result.added ? 201 : 200, np.uri() + "\n");
}

HttpResponse Api::postPeer(std::string_view body) const {
  if (!acceptsPosts_) return text(405, "this server does not accept peers\n");
  switch (peers_.add(trim(body))) {
    case PeerSet::AddOutcome::kAdded:
      spdlog::info("new peer {}", trim(body));
      return text(202, "accepted\n");
    case PeerSet::AddOutcome::kDuplicate:
      return text(200, "already known\n");
    case PeerSet::AddOutcome::kSelf:
      return text(200, "own URL ignored\n");
    case PeerSet::AddOutcome::kInvalid:
      break;
  }
  return text(400, "not a server URL\n");
}

}  // namespace nanomesh
