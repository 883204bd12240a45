#pragma once

// Health checks over a set of servers. Each probe reads the server info,
// picks a uniformly random journal position, reads the page holding it and
// then fetches and verifies that nanopub. Results go to a CSV log:
//
//   server,timestamp,info_ms,fetch_ms,verified,count,error
//
// `verified` is empty when no fetch was attempted (server unreachable or
// empty). Latencies are wall-clock milliseconds with microsecond precision.

#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stop_token>
#include <string>
#include <vector>

#include "nanomesh/csv.h"
#include "nanomesh/transport.h"

namespace nanomesh {

inline constexpr const char* kProbeCsvHeader =
    "server,timestamp,info_ms,fetch_ms,verified,count,error";

struct ProbeResult {
  std::string serverUrl;
  csv::Timestamp timestamp{};
  std::optional<std::chrono::microseconds> infoLatency;
  std::optional<std::chrono::microseconds> fetchLatency;
  std::optional<bool> verified;
  std::uint64_t nanopubCount = 0;
  std::optional<std::string> error;

  friend bool operator==(const ProbeResult&, const ProbeResult&) = default;
};

// Never throws; failures end up in `error`.
ProbeResult probe(Transport& transport, const std::string& server, std::mt19937_64& rng);

std::string formatProbe(const ProbeResult& result);
// Throws Error on malformed rows.
ProbeResult parseProbe(std::string_view line);
// Skips the header and blank lines.
std::vector<ProbeResult> readProbeLog(std::istream& in);

struct MonitorOptions {
  std::chrono::milliseconds interval{60'000};
  std::size_t rounds = 0;  // 0 runs until stopped
  std::uint64_t seed = std::random_device{}();
};

// Probes every server once per interval and appends one row per probe to
// `sink`, flushing after each row. Returns the number of rows written.
std::size_t monitorLoop(Transport& transport, const std::vector<std::string>& servers,
                        const MonitorOptions& options, std::ostream& sink,
                        std::stop_token stop = {});

struct ServerSummary {
  std::size_t probes = 0;
  // Nearest-rank percentiles over every timed request (info and fetch).
  std::optional<std::chrono::microseconds> p50;
  std::optional<std::chrono::microseconds> p99;
  std::optional<std::chrono::microseconds> max;
  // Share of probes without an error and without a failed verification.
  double successRate = 0;
  std::size_t verifyFailures = 0;
  std::size_t errors = 0;
};

// Throws Error on an empty log.
std::map<std::string, ServerSummary> summarize(const std::vector<ProbeResult>& log);

// Nearest-rank percentile of a non-empty sample; p in (0, 100].
std::chrono::microseconds nearestRank(std::vector<std::chrono::microseconds> samples, double p);

}  // namespace nanomesh
