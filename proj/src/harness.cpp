#include "nanomesh/harness.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>

#include "nanomesh/corpus.h"
#include "nanomesh/csv.h"
#include "nanomesh/errors.h"
#include "nanomesh/monitor.h"
#include "nanomesh/rdf_io.h"
#include "nanomesh/remote.h"
#include "nanomesh/replicator.h"
#include "nanomesh/transport.h"
#include "nanomesh/wire.h"

namespace nanomesh {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using std::chrono::microseconds;
using std::chrono::milliseconds;

namespace {

HttpTransportOptions pollingTimeouts() {
  HttpTransportOptions o;
  o.connectTimeout = std::chrono::seconds(2);
  o.readTimeout = std::chrono::seconds(10);
  return o;
}

std::string seconds(milliseconds ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(ms.count()) / 1000.0);
  return buf;
}

std::uint64_t toU64(const std::string& text, const char* what) {
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw Error(std::string("bad ") + what + " '" + text + "'");
  }
  return value;
}

// Rows of a CSV file after its header. Throws Error if the header differs.
std::vector<std::vector<std::string>> readCsv(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error(path.string() + ": unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(csv::splitRow(line));
  }
  return rows;
}

constexpr const char* kRunHeader =
    "kind,servers,total_replicated,convergence_ms,throughput_per_hour,verify_failures,"
    "requests,page_requests,errors,timeouts,total_latency_us,duration_ms,mean_ms,"
    "requests_per_s";
constexpr const char* kProgressHeader = "elapsed_ms,server,count";
constexpr const char* kLatencyHeader = "clients,requests,errors,mean_ms,p50_ms,p99_ms";
constexpr const char* kClientsHeader = "client,requests";

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

int freePort() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    ::close(fd);
    throw Error("cannot find a free port");
  }
  ::close(fd);
  return ntohs(addr.sin_port);
}

bool waitForServer(const std::string& url, milliseconds timeout) {
  HttpTransport transport(pollingTimeouts());
  auto deadline = Clock::now() + timeout;
  while (Clock::now() < deadline) {
    try {
      if (transport.get(url).status == 200) return true;
    } catch (const FetchError&) {
    }
    std::this_thread::sleep_for(milliseconds(50));
  }
  return false;
}

LocalNetwork::LocalNetwork(NetworkOptions options) : options_(std::move(options)) {
  fs::create_directories(options_.workDir);
  for (std::size_t i = 0; i < options_.serverCount; ++i) {
    int port = 0;
    do {
      port = freePort();
    } while (std::find(ports_.begin(), ports_.end(), port) != ports_.end());
    ports_.push_back(port);
    urls_.push_back("http://127.0.0.1:" + std::to_string(port) + "/");
  }
  processes_.resize(options_.serverCount);
}

LocalNetwork::~LocalNetwork() { stopAll(); }

fs::path LocalNetwork::dataDir(std::size_t i) const {
  return options_.workDir / ("server" + std::to_string(i));
}

fs::path LocalNetwork::logFile(std::size_t i) const {
  return options_.workDir / ("server" + std::to_string(i) + ".log");
}

void LocalNetwork::start(std::size_t i, const std::vector<fs::path>& loadFiles) {
  if (processes_.at(i).running()) throw Error("server " + std::to_string(i) + " is running");
  std::vector<std::string> argv = {
      options_.serverBinary.string(), "serve",
      "--listen", "127.0.0.1:" + std::to_string(ports_[i]),
      "--public-url", urls_[i],
      "--data-dir", dataDir(i).string(),
      "--page-size", std::to_string(options_.pageSize),
      "--loop-interval", seconds(options_.loopInterval),
  };
  for (std::size_t j = 0; j < urls_.size(); ++j) {
    if (j != i) argv.insert(argv.end(), {"--peer", urls_[j]});
  }
  for (const auto& extra : options_.extraPeers) argv.insert(argv.end(), {"--peer", extra});
  if (!options_.fsync) argv.push_back("--no-sync");
  for (const auto& file : loadFiles) argv.insert(argv.end(), {"--load", file.string()});
  processes_[i] = ChildProcess::spawn(argv, logFile(i));
  if (!waitForServer(urls_[i], std::chrono::seconds(30))) {
    processes_[i].terminate();
    throw Error("server " + std::to_string(i) + " did not come up; see " + logFile(i).string());
  }
}

void LocalNetwork::startAll() {
  for (std::size_t i = 0; i < size(); ++i) start(i);
}

void LocalNetwork::kill(std::size_t i, int signal) {
  processes_.at(i).signal(signal);
  processes_.at(i).wait(std::chrono::seconds(30));
}

void LocalNetwork::stop(std::size_t i) { processes_.at(i).terminate(); }

void LocalNetwork::stopAll() {
  for (auto& p : processes_) p.signal(SIGTERM);
  for (auto& p : processes_) p.terminate();
}

std::vector<std::optional<std::uint64_t>> LocalNetwork::counts() const {
  HttpTransport transport(pollingTimeouts());
  std::vector<std::optional<std::uint64_t>> out;
  for (const auto& url : urls_) {
    try {
      out.push_back(remote::fetchInfo(transport, url).nanopubCount);
    } catch (const Error&) {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

std::size_t LocalNetwork::spotCheck(std::size_t i, const std::vector<ArtifactCode>& codes,
                                    std::size_t sample, std::mt19937_64& rng) const {
  if (codes.empty()) return 0;
  std::vector<std::size_t> picks(codes.size());
  std::iota(picks.begin(), picks.end(), 0);
  std::shuffle(picks.begin(), picks.end(), rng);
  picks.resize(std::min(sample, picks.size()));
  HttpTransport transport(pollingTimeouts());
  std::size_t failures = 0;
  for (std::size_t k : picks) {
    try {
      remote::fetchVerified(transport, urls_.at(i), codes[k]);
    } catch (const FetchError& err) {
      spdlog::warn("spot check on {}: {}", urls_[i], err.what());
      ++failures;
    }
  }
  return failures;
}

std::uint64_t LocalNetwork::loggedVerifyFailures() const {
  std::uint64_t failures = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    std::ifstream in(logFile(i));
    std::string line;
    while (std::getline(in, line)) {
      if (auto report = parseSyncLine(line)) failures += report->verifyFailures;
    }
  }
  return failures;
}

double RunMetrics::replicationThroughput() const {
  if (convergenceTime.count() <= 0) return 0;
  return static_cast<double>(totalReplicated) * 3600'000.0 /
         static_cast<double>(convergenceTime.count());
}

double RunMetrics::meanLatencyMs() const {
  if (requestCount == 0) return 0;
  return static_cast<double>(totalLatency.count()) / 1000.0 / static_cast<double>(requestCount);
}

double RunMetrics::requestsPerSecond() const {
  if (duration.count() <= 0) return 0;
  return static_cast<double>(requestCount) * 1000.0 / static_cast<double>(duration.count());
}

RunMetrics runReplicationExperiment(const NetworkPlan& plan) {
  const std::size_t n = plan.network.serverCount;
  if (n < 2) throw Error("a replication run needs at least two servers");
  if (plan.assignments.size() != n) throw Error("one assignment per server is required");
  const std::size_t total =
      std::accumulate(plan.assignments.begin(), plan.assignments.end(), std::size_t{0});

  fs::create_directories(plan.network.workDir);
  std::vector<Nanopub> corpus = genCorpus(total, plan.corpusSeed);
  std::vector<ArtifactCode> codes;
  for (const auto& np : corpus) codes.push_back(TrustyUri::parse(np.uri()).code);
  std::vector<std::vector<fs::path>> loads(n);
  std::size_t from = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = plan.assignments[i];
    if (count == 0) continue;
    std::vector<Quad> quads;
    for (std::size_t k = from; k < from + count; ++k) {
      quads.insert(quads.end(), corpus[k].quads().begin(), corpus[k].quads().end());
    }
    fs::path file = plan.network.workDir / ("load-" + std::to_string(i) + ".nq");
    writeFile(file, serializeQuads(quads, Format::kLineQuads));
    loads[i].push_back(file);
    from += count;
  }
  corpus.clear();

  LocalNetwork net(plan.network);
  RunMetrics metrics;
  metrics.kind = "replicate";
  metrics.serverCount = n;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < n; ++i) net.start(i, loads[i]);

  std::vector<std::optional<std::uint64_t>> counts;
  while (true) {
    counts = net.counts();
    const auto elapsed = std::chrono::duration_cast<milliseconds>(Clock::now() - start);
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i]) metrics.progress.push_back({static_cast<std::uint64_t>(elapsed.count()), i, *counts[i]});
    }
    bool done = std::all_of(counts.begin(), counts.end(),
                            [&](const auto& c) { return c && *c == total; });
    if (done) {
      metrics.convergenceTime = elapsed;
      break;
    }
    if (elapsed >= plan.timeout) {
      std::string detail;
      for (std::size_t i = 0; i < n; ++i) {
        detail += " " + net.url(i) + "=" + (counts[i] ? std::to_string(*counts[i]) : "down");
      }
      throw Error("no convergence to " + std::to_string(total) + " within " +
                  std::to_string(plan.timeout.count()) + " s:" + detail);
    }
    std::this_thread::sleep_for(plan.pollInterval);
  }

  std::mt19937_64 rng(plan.corpusSeed ^ 0x5eed);
  std::size_t spotFailures = 0;
  for (std::size_t i = 0; i < n; ++i) spotFailures += net.spotCheck(i, codes, plan.spotChecks, rng);
  net.stopAll();
  metrics.totalReplicated = total;
  metrics.verifyFailures = net.loggedVerifyFailures();
  if (spotFailures > 0) {
    throw Error(std::to_string(spotFailures) + " spot checks failed after convergence");
  }
  return metrics;
}

namespace {

struct Sample {
  std::size_t clients;
  microseconds latency;
  bool error;
  bool timeout;
};

}  // namespace

RunMetrics runLoadExperiment(const LoadPlan& plan) {
  if (!(plan.fetchProbability >= 0 && plan.fetchProbability <= 1)) {
    throw Error("fetch probability must be within [0, 1]");
  }
  if (plan.maxClients == 0) throw Error("at least one client is required");
  ServerInfo info;
  {
    HttpTransport transport(pollingTimeouts());
    info = remote::fetchInfo(transport, plan.targetServer);
  }
  if (info.nanopubCount == 0) throw Error("target server holds no nanopublications");
  const std::uint64_t lastPage = (info.nanopubCount + info.pageSize - 1) / info.pageSize;

  std::atomic<std::size_t> active{0};
  std::vector<std::vector<Sample>> samples(plan.maxClients);
  std::vector<std::uint64_t> pageRequests(plan.maxClients, 0);
  const auto start = Clock::now();
  const auto deadline = start + plan.rampDuration;

  auto client = [&](std::size_t k) {
    std::this_thread::sleep_until(start + plan.rampDuration * k / plan.maxClients);
    if (Clock::now() >= deadline) return;
    ++active;
    HttpTransportOptions options;
    options.readTimeout = plan.requestTimeout;
    options.connectTimeout = plan.requestTimeout;
    HttpTransport transport(options);
    std::mt19937_64 rng(plan.seed * 1000003 + k);
    std::uniform_int_distribution<std::uint64_t> pickPage(1, lastPage);
    std::bernoulli_distribution fetch(plan.fetchProbability);
    auto timed = [&](const std::string& url, std::string* body) {
      const std::size_t clients = active.load();
      const auto t0 = Clock::now();
      bool error = false;
      try {
        TransportResponse r = transport.get(url);
        error = r.status != 200;
        if (body && !error) *body = std::move(r.body);
      } catch (const FetchError&) {
        error = true;
      }
      auto latency = std::chrono::duration_cast<microseconds>(Clock::now() - t0);
      bool timeout = error && latency >= plan.requestTimeout * 95 / 100;
      samples[k].push_back({clients, latency, error, timeout});
      return !error;
    };
    // A client always finishes the page it started, then checks the clock.
    while (Clock::now() < deadline) {
      std::string body;
      ++pageRequests[k];
      if (!timed(plan.targetServer + "journal/" + std::to_string(pickPage(rng)), &body)) continue;
      std::vector<ArtifactCode> codes;
      try {
        codes = parsePageListing(body);
      } catch (const Error&) {
        samples[k].back().error = true;
        continue;
      }
      for (const auto& code : codes) {
        if (fetch(rng)) timed(remote::nanopubUrl(plan.targetServer, code), nullptr);
      }
    }
    --active;
  };

  {
    std::vector<std::jthread> clients;
    for (std::size_t k = 0; k < plan.maxClients; ++k) clients.emplace_back(client, k);
  }

  RunMetrics metrics;
  metrics.kind = "load";
  metrics.serverCount = 1;
  metrics.duration = std::chrono::duration_cast<milliseconds>(Clock::now() - start);
  std::map<std::size_t, std::vector<Sample>> byClients;
  for (std::size_t k = 0; k < plan.maxClients; ++k) {
    metrics.perClientRequests.push_back(samples[k].size());
    metrics.pageRequests += pageRequests[k];
    for (const auto& s : samples[k]) {
      ++metrics.requestCount;
      metrics.errorCount += s.error;
      metrics.timeoutCount += s.timeout;
      metrics.totalLatency += s.latency;
      byClients[s.clients].push_back(s);
    }
  }
  for (const auto& [clients, group] : byClients) {
    ClientBucket bucket;
    bucket.clients = clients;
    std::vector<microseconds> latencies;
    microseconds sum{0};
    for (const auto& s : group) {
      ++bucket.requests;
      bucket.errors += s.error;
      latencies.push_back(s.latency);
      sum += s.latency;
    }
    bucket.mean = sum / static_cast<long long>(group.size());
    bucket.p50 = nearestRank(latencies, 50);
    bucket.p99 = nearestRank(latencies, 99);
    metrics.latencyByClientCount.push_back(bucket);
  }
  return metrics;
}

void reportRun(const RunMetrics& m, const fs::path& outDir) {
  fs::create_directories(outDir);
  auto open = [&](const char* name) {
    std::ofstream out(outDir / name, std::ios::trunc);
    if (!out) throw Error("cannot write " + (outDir / name).string());
    return out;
  };
  {
    auto out = open("run.csv");
    out << kRunHeader << "\n"
        << csv::row({m.kind, std::to_string(m.serverCount), std::to_string(m.totalReplicated),
                     std::to_string(m.convergenceTime.count()), fixed(m.replicationThroughput()),
                     std::to_string(m.verifyFailures), std::to_string(m.requestCount),
                     std::to_string(m.pageRequests), std::to_string(m.errorCount),
                     std::to_string(m.timeoutCount), std::to_string(m.totalLatency.count()),
                     std::to_string(m.duration.count()), fixed(m.meanLatencyMs()),
                     fixed(m.requestsPerSecond())})
        << "\n";
  }
  {
    auto out = open("progress.csv");
    out << kProgressHeader << "\n";
    for (const auto& p : m.progress) {
      out << p.elapsedMs << "," << p.server << "," << p.count << "\n";
    }
  }
  {
    auto out = open("latency.csv");
    out << kLatencyHeader << "\n";
    for (const auto& b : m.latencyByClientCount) {
      out << b.clients << "," << b.requests << "," << b.errors << "," << csv::formatMillis(b.mean)
          << "," << csv::formatMillis(b.p50) << "," << csv::formatMillis(b.p99) << "\n";
    }
  }
  {
    auto out = open("clients.csv");
    out << kClientsHeader << "\n";
    for (std::size_t k = 0; k < m.perClientRequests.size(); ++k) {
      out << k << "," << m.perClientRequests[k] << "\n";
    }
  }
  {
    auto out = open("summary.txt");
    if (m.kind == "replicate") {
      out << "servers: " << m.serverCount << "\n"
          << "nanopubs replicated to every server: " << m.totalReplicated << "\n"
          << "convergence time: " << seconds(m.convergenceTime) << " s\n"
          << "throughput: " << fixed(m.replicationThroughput()) << " nanopubs/hour ("
          << fixed(m.replicationThroughput() / 3600.0) << " per second)\n"
          << "verification failures: " << m.verifyFailures << "\n";
    } else {
      out << "requests: " << m.requestCount << " (" << m.pageRequests << " page listings)\n"
          << "errors: " << m.errorCount << "\n"
          << "timeouts: " << m.timeoutCount << "\n"
          << "duration: " << seconds(m.duration) << " s\n"
          << "requests per second: " << fixed(m.requestsPerSecond()) << "\n"
          << "mean latency: " << fixed(m.meanLatencyMs()) << " ms\n";
      if (!m.latencyByClientCount.empty()) {
        const auto& last = m.latencyByClientCount.back();
        out << "median latency at " << last.clients
            << " clients: " << csv::formatMillis(last.p50) << " ms\n";
      }
    }
  }
}

RunMetrics readRun(const fs::path& outDir) {
  RunMetrics m;
  auto run = readCsv(outDir / "run.csv", kRunHeader);
  if (run.size() != 1 || run[0].size() != 14) throw Error("run.csv must hold one full row");
  const auto& r = run[0];
  m.kind = r[0];
  m.serverCount = toU64(r[1], "servers");
  m.totalReplicated = toU64(r[2], "total_replicated");
  m.convergenceTime = milliseconds(toU64(r[3], "convergence_ms"));
  m.verifyFailures = toU64(r[5], "verify_failures");
  m.requestCount = toU64(r[6], "requests");
  m.pageRequests = toU64(r[7], "page_requests");
  m.errorCount = toU64(r[8], "errors");
  m.timeoutCount = toU64(r[9], "timeouts");
  m.totalLatency = microseconds(toU64(r[10], "total_latency_us"));
  m.duration = milliseconds(toU64(r[11], "duration_ms"));
  for (const auto& row : readCsv(outDir / "progress.csv", kProgressHeader)) {
    if (row.size() != 3) throw Error("progress.csv: expected 3 fields");
    m.progress.push_back({toU64(row[0], "elapsed_ms"), toU64(row[1], "server"),
                          toU64(row[2], "count")});
  }
  for (const auto& row : readCsv(outDir / "latency.csv", kLatencyHeader)) {
    if (row.size() != 6) throw Error("latency.csv: expected 6 fields");
    ClientBucket b;
    b.clients = toU64(row[0], "clients");
    b.requests = toU64(row[1], "requests");
    b.errors = toU64(row[2], "errors");
    b.mean = csv::parseMillis(row[3]).value_or(microseconds(0));
    b.p50 = csv::parseMillis(row[4]).value_or(microseconds(0));
    b.p99 = csv::parseMillis(row[5]).value_or(microseconds(0));
    m.latencyByClientCount.push_back(b);
  }
  for (const auto& row : readCsv(outDir / "clients.csv", kClientsHeader)) {
    if (row.size() != 2) throw Error("clients.csv: expected 2 fields");
    m.perClientRequests.push_back(toU64(row[1], "requests"));
  }
  return m;
}

}  // namespace nanomesh
