#pragma once

// Desk-scale experiments over real server processes on localhost:
// replication of bulk-loaded corpora across a small network, and a ramped
// retrieval load against one server.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nanomesh/constants.h"
#include "nanomesh/process.h"
#include "nanomesh/trusty.h"

namespace nanomesh {

struct NetworkOptions {
  std::filesystem::path serverBinary;  // npserver
  std::filesystem::path workDir;       // one subdirectory per server
  std::size_t serverCount = 3;
  std::size_t pageSize = kDefaultPageSize;
  std::chrono::milliseconds loopInterval{1000};
  bool fsync = true;
  // Peers every server is seeded with besides the other servers.
  std::vector<std::string> extraPeers;
};

// Servers on free localhost ports, each seeded with all the others.
class LocalNetwork {
 public:
  explicit LocalNetwork(NetworkOptions options);
  ~LocalNetwork();

  std::size_t size() const { return urls_.size(); }
  const std::string& url(std::size_t i) const { return urls_.at(i); }
  std::filesystem::path dataDir(std::size_t i) const;
  std::filesystem::path logFile(std::size_t i) const;

  // Starts (or restarts) server i and waits until it answers. `loadFiles`
  // are bulk-loaded in the background.
  void start(std::size_t i, const std::vector<std::filesystem::path>& loadFiles = {});
  void startAll();
  void kill(std::size_t i, int signal);
  void stop(std::size_t i);
  void stopAll();
  ChildProcess& process(std::size_t i) { return processes_.at(i); }

  // nullopt for servers that do not answer.
  std::vector<std::optional<std::uint64_t>> counts() const;
  // Fetches and verifies `sample` random codes of `codes` on server i;
  // returns the number that are missing or do not verify.
  std::size_t spotCheck(std::size_t i, const std::vector<ArtifactCode>& codes,
                        std::size_t sample, std::mt19937_64& rng) const;
  // Sum of failed= over all SYNC lines in the server logs.
  std::uint64_t loggedVerifyFailures() const;

 private:
  NetworkOptions options_;
  std::vector<int> ports_;
  std::vector<std::string> urls_;
  std::vector<ChildProcess> processes_;
};

// A free TCP port on 127.0.0.1 at the time of the call.
int freePort();

// Polls GET / until it answers or `timeout` passes.
bool waitForServer(const std::string& url, std::chrono::milliseconds timeout);

struct NetworkPlan {
  NetworkOptions network;
  // Nanopubs loaded from local files at each server; one entry per server.
  std::vector<std::size_t> assignments;
  std::uint64_t corpusSeed = 1;
  std::chrono::seconds timeout{300};
  std::chrono::milliseconds pollInterval{200};
  std::size_t spotChecks = 100;
};

struct LoadPlan {
  std::string targetServer;
  std::size_t maxClients = 100;
  std::chrono::milliseconds rampDuration{300'000};
  double fetchProbability = 0.10;
  std::chrono::milliseconds requestTimeout{60'000};
  std::uint64_t seed = 1;
};

struct ProgressSample {
  std::uint64_t elapsedMs = 0;
  std::size_t server = 0;
  std::uint64_t count = 0;
  friend bool operator==(const ProgressSample&, const ProgressSample&) = default;
};

// Requests issued while `clients` clients were running.
struct ClientBucket {
  std::size_t clients = 0;
  std::uint64_t requests = 0;
  std::uint64_t errors = 0;
  std::chrono::microseconds mean{0};
  std::chrono::microseconds p50{0};
  std::chrono::microseconds p99{0};
  friend bool operator==(const ClientBucket&, const ClientBucket&) = default;
};

struct RunMetrics {
  std::string kind;  // "replicate" or "load"
  std::size_t serverCount = 0;

  // Replication: distinct nanopubs that reached every server, and when.
  std::uint64_t totalReplicated = 0;
  std::chrono::milliseconds convergenceTime{0};
  std::uint64_t verifyFailures = 0;
  std::vector<ProgressSample> progress;

  // Load.
  std::uint64_t requestCount = 0;
  std::uint64_t pageRequests = 0;  // the rest fetched single nanopubs
  std::uint64_t errorCount = 0;
  std::uint64_t timeoutCount = 0;
  std::chrono::microseconds totalLatency{0};
  std::chrono::milliseconds duration{0};
  std::vector<ClientBucket> latencyByClientCount;
  std::vector<std::uint64_t> perClientRequests;

  // Nanopubs per hour.
  double replicationThroughput() const;
  double meanLatencyMs() const;
  double requestsPerSecond() const;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

// Throws Error when the network does not converge in time; the message
// carries the per-server counts.
RunMetrics runReplicationExperiment(const NetworkPlan& plan);

RunMetrics runLoadExperiment(const LoadPlan& plan);

// Writes run.csv, progress.csv, latency.csv, clients.csv and summary.txt
// into `outDir`.
void reportRun(const RunMetrics& metrics, const std::filesystem::path& outDir);
// Reads back what reportRun wrote.
RunMetrics readRun(const std::filesystem::path& outDir);

}  // namespace nanomesh
