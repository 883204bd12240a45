#pragma once

// Client-side request plumbing. Network code talks to a Transport so tests
// can substitute an in-memory one that routes straight into Api objects.

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "nanomesh/api.h"

namespace nanomesh {

struct TransportResponse {
  int status = 0;
  std::string body;
  std::string contentType;
  std::string contentEncoding;
};

class Transport {
 public:
  virtual ~Transport() = default;
  // Throw FetchError when no response arrives (refused, timeout, reset).
  virtual TransportResponse get(const std::string& url, std::string_view accept = {}) = 0;
  virtual TransportResponse post(const std::string& url, std::string_view body,
                                 std::string_view contentType) = 0;
};

struct HttpTransportOptions {
  std::chrono::milliseconds connectTimeout{5000};
  std::chrono::milliseconds readTimeout{60000};
};

// Keeps one keep-alive connection per origin. Not thread-safe; use one
// instance per thread.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpTransportOptions options = {});
  ~HttpTransport() override;
  TransportResponse get(const std::string& url, std::string_view accept = {}) override;
  TransportResponse post(const std::string& url, std::string_view body,
                         std::string_view contentType) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Routes requests to Api objects registered by origin ("http://a:1").
// Unregistered origins behave like refused connections. Thread-safe.
class LocalTransport : public Transport {
 public:
  void attach(const std::string& serverUrl, const Api* api);
  void detach(const std::string& serverUrl);
  TransportResponse get(const std::string& url, std::string_view accept = {}) override;
  TransportResponse post(const std::string& url, std::string_view body,
                         std::string_view contentType) override;

  int calls() const { return calls_; }

 private:
  TransportResponse dispatch(HttpRequest request, const std::string& url);

  mutable std::mutex mutex_;
  std::map<std::string, const Api*> apis_;
  std::atomic<int> calls_{0};
};

// Splits "http://host:port/path" into origin and path ("/" if absent).
// Throws FetchError for anything else.
std::pair<std::string, std::string> splitUrl(const std::string& url);

}  // namespace nanomesh
