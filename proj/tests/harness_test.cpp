#include <gtest/gtest.h>

#include <signal.h>

#include <fstream>
#include <thread>

#include "nanomesh/corpus.h"
#include "nanomesh/errors.h"
#include "nanomesh/harness.h"
#include "nanomesh/http_server.h"
#include "node_fixture.h"

using namespace nanomesh;
using namespace std::chrono_literals;
using nanomesh::testing::TempDir;
using nanomesh::testing::TestNode;
namespace fs = std::filesystem;

namespace {

// A TestNode served over real HTTP on a free port.
struct ServedNode {
  explicit ServedNode(std::size_t pageSize)
      : port(freePort()),
        url("http://127.0.0.1:" + std::to_string(port) + "/"),
        node(url, pageSize),
        server(node.api, 16) {
    server.bind("127.0.0.1", port);
    thread = std::thread([this] { server.run(); });
    server.waitUntilReady();
  }
  ~ServedNode() {
    server.stop();
    thread.join();
  }
  int port;
  std::string url;
  TestNode node;
  HttpServer server;
  std::thread thread;
};

RunMetrics sampleMetrics() {
  RunMetrics m;
  m.kind = "load";
  m.serverCount = 1;
  m.requestCount = 7;
  m.pageRequests = 3;
  m.errorCount = 1;
  m.timeoutCount = 0;
  m.totalLatency = 12345us;
  m.duration = 2500ms;
  m.latencyByClientCount = {{1, 3, 0, 1500us, 1400us, 1700us}, {2, 4, 1, 2250us, 2001us, 3999us}};
  m.perClientRequests = {5, 2};
  return m;
}

}  // namespace

TEST(Corpus, DeterministicAndRealisticallySized) {
  auto a = genCorpus(20, 42);
  auto b = genCorpus(20, 42);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].uri(), b[i].uri());
  EXPECT_NE(genCorpus(1, 43)[0].uri(), a[0].uri());
  EXPECT_TRUE(genCorpus(0, 1).empty());

  auto many = genCorpus(1000, 7);
  double quads = 0;
  for (const auto& np : many) quads += static_cast<double>(np.quads().size());
  double mean = quads / static_cast<double>(many.size());
  EXPECT_GE(mean, 20.0);
  EXPECT_LE(mean, 40.0);
}

TEST(Report, RoundTripsThroughCsv) {
  TempDir dir;
  RunMetrics m = sampleMetrics();
  reportRun(m, dir.path());
  EXPECT_EQ(readRun(dir.path()), m);
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));

  RunMetrics r;
  r.kind = "replicate";
  r.serverCount = 3;
  r.totalReplicated = 10000;
  r.convergenceTime = 90000ms;
  r.progress = {{0, 0, 0}, {200, 1, 17}, {90000, 2, 10000}};
  reportRun(r, dir / "rep");
  EXPECT_EQ(readRun(dir / "rep"), r);
}

TEST(Report, EmptySeriesGiveHeaderOnlyFiles) {
  TempDir dir;
  RunMetrics m;
  m.kind = "replicate";
  reportRun(m, dir.path());
  for (const char* name : {"progress.csv", "latency.csv", "clients.csv"}) {
    std::ifstream in(dir / name);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 1) << name;
  }
  EXPECT_EQ(readRun(dir.path()), m);
}

TEST(Report, ThroughputMatchesRawRows) {
  TempDir dir;
  RunMetrics r;
  r.kind = "replicate";
  r.serverCount = 2;
  r.totalReplicated = 5000;
  r.progress = {{0, 0, 5000}, {0, 1, 0}, {1000, 0, 5000}, {1000, 1, 2600},
                {2400, 0, 5000}, {2400, 1, 5000}};
  r.convergenceTime = 2400ms;
  reportRun(r, dir.path());

  // Recompute from the progress rows: first sample time at which every
  // server holds the total.
  auto back = readRun(dir.path());
  std::map<std::uint64_t, std::vector<std::uint64_t>> byTime;
  for (const auto& p : back.progress) byTime[p.elapsedMs].push_back(p.count);
  std::uint64_t converged = 0;
  for (const auto& [t, counts] : byTime) {
    if (counts.size() == 2 && counts[0] == 5000 && counts[1] == 5000) {
      converged = t;
      break;
    }
  }
  ASSERT_EQ(converged, 2400u);
  double recomputed = 5000.0 / (static_cast<double>(converged) / 3600'000.0);
  EXPECT_DOUBLE_EQ(back.replicationThroughput(), recomputed);
  EXPECT_DOUBLE_EQ(recomputed, 7'500'000.0);

  std::ifstream in(dir / "run.csv");
  std::string header;
  std::string row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_NE(row.find(",7500000.000,"), std::string::npos) << row;
}

TEST(Process, SpawnSignalAndWait) {
  TempDir dir;
  auto child = ChildProcess::spawn({"/bin/sleep", "30"}, dir / "log");
  EXPECT_TRUE(child.running());
  child.signal(SIGKILL);
  auto status = child.wait(10s);
  ASSERT_TRUE(status);
  EXPECT_TRUE(WIFSIGNALED(*status));
  EXPECT_FALSE(child.running());
  EXPECT_THROW(ChildProcess::spawn({"/nonexistent/binary"}, dir / "log").wait(5s).value(),
               std::exception);
}

TEST(Load, RequestMixFollowsFetchProbability) {
  ServedNode served(10);
  served.node.store->putBatch(genCorpus(50, 3));

  LoadPlan none;
  none.targetServer = served.url;
  none.maxClients = 2;
  none.rampDuration = 600ms;
  none.fetchProbability = 0;
  RunMetrics m0 = runLoadExperiment(none);
  EXPECT_GT(m0.requestCount, 0u);
  EXPECT_EQ(m0.requestCount, m0.pageRequests);
  EXPECT_EQ(m0.errorCount, 0u);

  LoadPlan all = none;
  all.fetchProbability = 1.0;
  RunMetrics m1 = runLoadExperiment(all);
  EXPECT_GT(m1.pageRequests, 0u);
  // Every page is full, and a client always finishes its page.
  EXPECT_EQ(m1.requestCount, m1.pageRequests * 11);
  EXPECT_EQ(m1.errorCount, 0u);
  std::uint64_t sum = 0;
  for (auto n : m1.perClientRequests) sum += n;
  EXPECT_EQ(sum, m1.requestCount);
  std::uint64_t bucketed = 0;
  for (const auto& b : m1.latencyByClientCount) {
    bucketed += b.requests;
    EXPECT_GE(b.clients, 1u);
    EXPECT_LE(b.clients, 2u);
    EXPECT_LE(b.p50, b.p99);
  }
  EXPECT_EQ(bucketed, m1.requestCount);
}

TEST(Load, SmokeRampWithoutErrors) {
  ServedNode served(100);
  served.node.store->putBatch(genCorpus(1000, 4));
  LoadPlan plan;
  plan.targetServer = served.url;
  plan.maxClients = 10;
  plan.rampDuration = 3s;
  RunMetrics m = runLoadExperiment(plan);
  EXPECT_GT(m.requestCount, 0u);
  EXPECT_EQ(m.errorCount, 0u);
  EXPECT_EQ(m.timeoutCount, 0u);
  EXPECT_EQ(m.latencyByClientCount.back().clients, 10u);
}

TEST(Load, RejectsBadPlans) {
  ServedNode served(10);
  LoadPlan plan;
  plan.targetServer = served.url;
  EXPECT_THROW(runLoadExperiment(plan), Error);  // empty server
  served.node.store->put(genCorpus(1, 5)[0]);
  plan.fetchProbability = 1.5;
  EXPECT_THROW(runLoadExperiment(plan), Error);
}

TEST(Replication, EmptyNetworkConvergesImmediately) {
  TempDir dir;
  NetworkPlan plan;
  plan.network.serverBinary = NANOMESH_SERVER_BINARY;
  plan.network.workDir = dir / "net";
  plan.network.serverCount = 2;
  plan.network.fsync = false;
  plan.assignments = {0, 0};
  RunMetrics m = runReplicationExperiment(plan);
  EXPECT_EQ(m.totalReplicated, 0u);
  EXPECT_EQ(m.convergenceTime.count(), m.progress.front().elapsedMs);
  EXPECT_DOUBLE_EQ(m.replicationThroughput(), 0.0);
  EXPECT_EQ(m.verifyFailures, 0u);
}

TEST(Replication, TwoSourcesConverge) {
  TempDir dir;
  NetworkPlan plan;
  plan.network.serverBinary = NANOMESH_SERVER_BINARY;
  plan.network.workDir = dir / "net";
  plan.network.serverCount = 2;
  plan.network.pageSize = 50;
  plan.network.loopInterval = 200ms;
  plan.network.fsync = false;
  plan.assignments = {150, 60};
  plan.timeout = 60s;
  plan.spotChecks = 20;
  RunMetrics m = runReplicationExperiment(plan);
  EXPECT_EQ(m.totalReplicated, 210u);
  EXPECT_EQ(m.verifyFailures, 0u);
  EXPECT_GT(m.convergenceTime.count(), 0);
  EXPECT_EQ(m.progress.back().count, 210u);
}

TEST(Replication, RejectsBadPlans) {
  NetworkPlan plan;
  plan.network.serverCount = 1;
  plan.assignments = {5};
  EXPECT_THROW(runReplicationExperiment(plan), Error);
  plan.network.serverCount = 2;
  EXPECT_THROW(runReplicationExperiment(plan), Error);
}
