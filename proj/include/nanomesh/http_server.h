#pragma once

// Serves an Api over HTTP/1.1.

#include <functional>
#include <memory>
#include <string>

#include "nanomesh/api.h"

namespace nanomesh {

class HttpServer {
 public:
  // Must not throw.
  using Handler = std::function<HttpResponse(const HttpRequest&)>;

  explicit HttpServer(const Api& api, std::size_t threads = 128);
  HttpServer(Handler handler, std::size_t threads);
  ~HttpServer();

  // Port 0 picks a free port. Returns the bound port; throws Error.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void run();
  // Returns once run() accepts connections.
  void waitUntilReady() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nanomesh
