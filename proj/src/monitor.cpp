#include "nanomesh/monitor.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <mutex>

#include "nanomesh/api.h"
#include "nanomesh/errors.h"
#include "nanomesh/remote.h"
#include "nanomesh/store.h"

namespace nanomesh {

namespace {

using std::chrono::microseconds;

microseconds since(std::chrono::steady_clock::time_point start) {
  // A request that completes within the clock's resolution still took time.
  auto d = std::chrono::duration_cast<microseconds>(std::chrono::steady_clock::now() - start);
  return std::max(d, microseconds(1));
}

}  // namespace

ProbeResult probe(Transport& transport, const std::string& server, std::mt19937_64& rng) {
  ProbeResult result;
  result.serverUrl = server;
  result.timestamp = std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
  try {
    auto start = std::chrono::steady_clock::now();
    ServerInfo info = remote::fetchInfo(transport, server);
    result.infoLatency = since(start);
    result.nanopubCount = info.nanopubCount;
    if (info.nanopubCount == 0) return result;
    if (info.pageSize == 0) throw Error("server reports page size 0");

    std::uniform_int_distribution<std::uint64_t> pick(1, info.nanopubCount);
    const std::uint64_t position = pick(rng);
    const std::uint64_t page = (position - 1) / info.pageSize + 1;
    const std::uint64_t offset = (position - 1) % info.pageSize;
    auto codes = remote::fetchPage(transport, server, page);
    if (offset >= codes.size()) {
      throw Error("page " + std::to_string(page) + " has " + std::to_string(codes.size()) +
                  " entries, expected position " + std::to_string(position));
    }
    const ArtifactCode& code = codes[offset];

    start = std::chrono::steady_clock::now();
    TransportResponse response = transport.get(remote::nanopubUrl(server, code), kLineQuadsType);
    result.fetchLatency = since(start);
    if (response.status != 200) {
      throw Error("GET " + code.str() + " answered HTTP " + std::to_string(response.status));
    }
    // A body that does not even parse is wrong data, not a transport failure.
    try {
      result.verified = verifyAs(parseNanopubBytes(response.body), code);
    } catch (const Error&) {
      result.verified = false;
    }
  } catch (const std::exception& err) {
    result.error = err.what();
    result.verified.reset();
  }
  return result;
}

std::string formatProbe(const ProbeResult& r) {
  std::string verified = r.verified ? (*r.verified ? "true" : "false") : "";
  return csv::row({r.serverUrl, csv::formatTimestamp(r.timestamp), csv::formatMillis(r.infoLatency),
                   csv::formatMillis(r.fetchLatency), verified, std::to_string(r.nanopubCount),
                   r.error.value_or("")});
}

ProbeResult parseProbe(std::string_view line) {
  auto fields = csv::splitRow(line);
  if (fields.size() != 7) {
    throw Error("expected 7 fields, got " + std::to_string(fields.size()));
  }
  ProbeResult r;
  r.serverUrl = fields[0];
  r.timestamp = csv::parseTimestamp(fields[1]);
  r.infoLatency = csv::parseMillis(fields[2]);
  r.fetchLatency = csv::parseMillis(fields[3]);
  if (fields[4] == "true") {
    r.verified = true;
  } else if (fields[4] == "false") {
    r.verified = false;
  } else if (!fields[4].empty()) {
    throw Error("bad verified value '" + fields[4] + "'");
  }
  const std::string& count = fields[5];
  auto [end, ec] = std::from_chars(count.data(), count.data() + count.size(), r.nanopubCount);
  if (ec != std::errc() || end != count.data() + count.size()) {
    throw Error("bad count '" + count + "'");
  }
  if (!fields[6].empty()) r.error = fields[6];
  return r;
}

std::vector<ProbeResult> readProbeLog(std::istream& in) {
  std::vector<ProbeResult> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == kProbeCsvHeader) continue;
    try {
      out.push_back(parseProbe(line));
    } catch (const Error& err) {
      throw Error("probe log line " + std::to_string(number) + ": " + err.what());
    }
  }
  return out;
}

std::size_t monitorLoop(Transport& transport, const std::vector<std::string>& servers,
                        const MonitorOptions& options, std::ostream& sink,
                        std::stop_token stop) {
  std::mt19937_64 rng(options.seed);
  std::mutex mutex;
  std::condition_variable_any wake;
  std::size_t rows = 0;
  for (std::size_t round = 0; options.rounds == 0 || round < options.rounds; ++round) {
    if (stop.stop_requested()) break;
    const auto deadline = std::chrono::steady_clock::now() + options.interval;
    for (const auto& server : servers) {
      ProbeResult r = probe(transport, server, rng);
      if (r.error) spdlog::warn("probe {} failed: {}", server, *r.error);
      if (r.verified == false) spdlog::error("probe {}: content does not verify", server);
      sink << formatProbe(r) << '\n' << std::flush;
      ++rows;
    }
    if (options.rounds != 0 && round + 1 == options.rounds) break;
    std::unique_lock lock(mutex);
    wake.wait_until(lock, stop, deadline, [] { return false; });
  }
  return rows;
}

std::chrono::microseconds nearestRank(std::vector<std::chrono::microseconds> samples, double p) {
  if (samples.empty()) throw Error("percentile of an empty sample");
  std::sort(samples.begin(), samples.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(samples.size())));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  return samples[rank - 1];
}

std::map<std::string, ServerSummary> summarize(const std::vector<ProbeResult>& log) {
  if (log.empty()) throw Error("empty probe log");
  std::map<std::string, ServerSummary> out;
  std::map<std::string, std::vector<microseconds>> latencies;
  std::map<std::string, std::size_t> successes;
  for (const auto& r : log) {
    ServerSummary& s = out[r.serverUrl];
    ++s.probes;
    auto& samples = latencies[r.serverUrl];
    if (r.infoLatency) samples.push_back(*r.infoLatency);
    if (r.fetchLatency) samples.push_back(*r.fetchLatency);
    if (r.error) ++s.errors;
    if (r.verified == false) ++s.verifyFailures;
    if (!r.error && r.verified != false) ++successes[r.serverUrl];
  }
  for (auto& [server, s] : out) {
    const auto& samples = latencies[server];
    if (!samples.empty()) {
      s.p50 = nearestRank(samples, 50);
      s.p99 = nearestRank(samples, 99);
      s.max = *std::max_element(samples.begin(), samples.end());
    }
    s.successRate = static_cast<double>(successes[server]) / static_cast<double>(s.probes);
  }
  return out;
}

}  // namespace nanomesh
