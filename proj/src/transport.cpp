#include "nanomesh/transport.h"

#include <httplib.h>

#include "nanomesh/errors.h"

namespace nanomesh {

std::pair<std::string, std::string> splitUrl(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw FetchError(url, "not an absolute URL");
  std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

struct HttpTransport::Impl {
  HttpTransportOptions options;
  std::map<std::string, std::unique_ptr<httplib::Client>> clients;

  httplib::Client& client(const std::string& origin, const std::string& url) {
    if (!origin.starts_with("http://")) {
      throw FetchError(url, "only http:// URLs are supported");
    }
    auto& slot = clients[origin];
    if (!slot) {
      slot = std::make_unique<httplib::Client>(origin);
      auto secs = [](std::chrono::milliseconds ms) {
        return std::pair<time_t, time_t>(ms.count() / 1000, (ms.count() % 1000) * 1000);
      };
      auto [cs, cu] = secs(options.connectTimeout);
      auto [rs, ru] = secs(options.readTimeout);
      slot->set_connection_timeout(cs, cu);
      slot->set_read_timeout(rs, ru);
      slot->set_write_timeout(rs, ru);
      slot->set_keep_alive(true);
      slot->set_decompress(false);
      slot->set_tcp_nodelay(true);
    }
    return *slot;
  }

  TransportResponse convert(const httplib::Result& result, const std::string& origin,
                            const std::string& url) {
    if (!result) {
      // Drop the connection so the next request starts fresh.
      clients.erase(origin);
      throw FetchError(url, httplib::to_string(result.error()));
    }
    TransportResponse r;
    r.status = result->status;
    r.body = result->body;
    r.contentType = result->get_header_value("Content-Type");
    r.contentEncoding = result->get_header_value("Content-Encoding");
    return r;
  }
};

HttpTransport::HttpTransport(HttpTransportOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
}

HttpTransport::~HttpTransport() = default;

TransportResponse HttpTransport::get(const std::string& url, std::string_view accept) {
  auto [origin, path] = splitUrl(url);
  httplib::Headers headers;
  if (!accept.empty()) headers.emplace("Accept", std::string(accept));
  auto& client = impl_->client(origin, url);
  return impl_->convert(client.Get(path, headers), origin, url);
}

TransportResponse HttpTransport::post(const std::string& url, std::string_view body,
                                      std::string_view contentType) {
  auto [origin, path] = splitUrl(url);
  auto& client = impl_->client(origin, url);
  return impl_->convert(
      client.Post(path, body.data(), body.size(), std::string(contentType)), origin, url);
}

void LocalTransport::attach(const std::string& serverUrl, const Api* api) {
  std::lock_guard lock(mutex_);
  apis_[splitUrl(serverUrl).first] = api;
}

void LocalTransport::detach(const std::string& serverUrl) {
  std::lock_guard lock(mutex_);
  apis_.erase(splitUrl(serverUrl).first);
}

TransportResponse LocalTransport::dispatch(HttpRequest request, const std::string& url) {
  ++calls_;
  auto [origin, path] = splitUrl(url);
  const Api* api = nullptr;
  {
    std::lock_guard lock(mutex_);
    auto it = apis_.find(origin);
    if (it != apis_.end()) api = it->second;
  }
  if (!api) throw FetchError(url, "Connection");
  request.path = path;
  HttpResponse response = api->handle(request);
  return TransportResponse{response.status, std::move(response.body), response.contentType,
                           response.contentEncoding};
}

TransportResponse LocalTransport::get(const std::string& url, std::string_view accept) {
  HttpRequest request;
  request.method = "GET";
  if (!accept.empty()) request.headers["accept"] = std::string(accept);
  return dispatch(std::move(request), url);
}

TransportResponse LocalTransport::post(const std::string& url, std::string_view body,
                                       std::string_view contentType) {
  HttpRequest request;
  request.method = "POST";
  request.body = std::string(body);
  request.headers["content-type"] = std::string(contentType);
  return dispatch(std::move(request), url);
}

}  // namespace nanomesh
