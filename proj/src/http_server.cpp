#include "nanomesh/http_server.h"

#include <httplib.h>

#include <algorithm>
#include <cctype>

#include "nanomesh/errors.h"

namespace nanomesh {

struct HttpServer::Impl {
  Handler handle;
  httplib::Server server;
  explicit Impl(Handler h) : handle(std::move(h)) {}
};

HttpServer::HttpServer(const Api& api, std::size_t threads)
    : HttpServer([&api](const HttpRequest& request) { return api.handle(request); }, threads) {}

HttpServer::HttpServer(Handler handler, std::size_t threads)
    : impl_(std::make_unique<Impl>(std::move(handler))) {
  auto& server = impl_->server;
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  // Above the API's own cap so oversized posts get the API's 413.
  server.set_payload_max_length(4 * kMaxPostBytes);
  server.set_keep_alive_max_count(10000);
  server.set_read_timeout(60);
  server.set_write_timeout(60);
  server.set_tcp_nodelay(true);
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.path = req.path;
    request.body = req.body;
    for (const auto& [name, value] : req.headers) {
      std::string key = name;
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      request.headers.emplace(std::move(key), value);
    }
    HttpResponse response = impl_->handle(request);
    res.status = response.status;
    if (!response.contentEncoding.empty()) {
      res.set_header("Content-Encoding", response.contentEncoding);
    }
    res.set_content(std::move(response.body), response.contentType);
  };
  server.Get(".*", dispatch);
  server.Post(".*", dispatch);
  server.Put(".*", dispatch);
  server.Delete(".*", dispatch);
  server.Patch(".*", dispatch);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::waitUntilReady() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace nanomesh
