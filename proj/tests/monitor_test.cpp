#include <gtest/gtest.h>

#include <sstream>

#include "nanomesh/corpus.h"
#include "nanomesh/csv.h"
#include "nanomesh/errors.h"
#include "nanomesh/monitor.h"
#include "node_fixture.h"
#include "tampering.h"

using namespace nanomesh;
using namespace std::chrono_literals;
using nanomesh::testing::TamperingTransport;
using nanomesh::testing::TestNode;

namespace {

const std::string kA = "http://a.local:1/";
const std::string kB = "http://b.local:2/";
const std::string kC = "http://c.local:3/";

std::chrono::microseconds ms(double v) {
  return std::chrono::microseconds(static_cast<long long>(v * 1000 + 0.5));
}

}  // namespace

TEST(Csv, FieldsRoundTrip) {
  std::vector<std::string> fields = {"plain", "with,comma", "say \"hi\"", "", "line\nbreak"};
  EXPECT_EQ(csv::splitRow(csv::row(fields)), fields);
  EXPECT_EQ(csv::row({"a", "b,c"}), "a,\"b,c\"");
  EXPECT_THROW(csv::splitRow("\"open"), Error);
}

TEST(Csv, TimestampsAndMillis) {
  auto t = csv::parseTimestamp("2026-10-16T09:30:00.125Z");
  EXPECT_EQ(csv::formatTimestamp(t), "2026-10-16T09:30:00.125Z");
  EXPECT_EQ(t.time_since_epoch().count(), 1792143000125);
  EXPECT_THROW(csv::parseTimestamp("yesterday"), Error);
  EXPECT_EQ(csv::formatMillis(std::chrono::microseconds(12345)), "12.345");
  EXPECT_EQ(csv::formatMillis(std::chrono::microseconds(7)), "0.007");
  EXPECT_EQ(csv::formatMillis(std::nullopt), "");
  EXPECT_EQ(csv::parseMillis("12.345"), std::chrono::microseconds(12345));
  EXPECT_EQ(csv::parseMillis("3"), std::chrono::microseconds(3000));
  EXPECT_EQ(csv::parseMillis(""), std::nullopt);
  EXPECT_THROW(csv::parseMillis("1.2345"), Error);
  EXPECT_THROW(csv::parseMillis("x"), Error);
}

TEST(Monitor, HealthyServerVerifies) {
  TestNode a(kA, 10);
  a.store->putBatch(genCorpus(25, 1));
  LocalTransport net;
  net.attach(kA, &a.api);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    ProbeResult r = probe(net, kA, rng);
    EXPECT_FALSE(r.error) << *r.error;
    EXPECT_EQ(r.verified, true);
    EXPECT_EQ(r.nanopubCount, 25u);
    ASSERT_TRUE(r.infoLatency && r.fetchLatency);
    EXPECT_GT(r.infoLatency->count(), 0);
    EXPECT_GT(r.fetchLatency->count(), 0);
  }
}

TEST(Monitor, EmptyServerSkipsFetch) {
  TestNode a(kA);
  LocalTransport net;
  net.attach(kA, &a.api);
  std::mt19937_64 rng(1);
  ProbeResult r = probe(net, kA, rng);
  EXPECT_FALSE(r.error);
  EXPECT_FALSE(r.verified);
  EXPECT_FALSE(r.fetchLatency);
  EXPECT_TRUE(r.infoLatency);
  EXPECT_EQ(r.nanopubCount, 0u);
}

TEST(Monitor, UnreachableServerIsRecorded) {
  LocalTransport net;
  std::mt19937_64 rng(1);
  ProbeResult r = probe(net, kA, rng);
  ASSERT_TRUE(r.error);
  EXPECT_FALSE(r.verified);
  EXPECT_FALSE(r.infoLatency);
}

TEST(Monitor, TamperedContentFailsVerification) {
  TestNode a(kA);
  a.store->putBatch(genCorpus(5, 2));
  LocalTransport inner;
  inner.attach(kA, &a.api);
  TamperingTransport net(inner, [](const std::string&) { return true; });
  std::mt19937_64 rng(1);
  ProbeResult r = probe(net, kA, rng);
  EXPECT_FALSE(r.error);
  EXPECT_EQ(r.verified, false);
  EXPECT_EQ(net.tampered, 1);
}

TEST(Monitor, LoopWritesOneRowPerServerAndRound) {
  TestNode a(kA);
  TestNode b(kB);
  a.store->putBatch(genCorpus(3, 4));
  b.store->putBatch(genCorpus(3, 5));
  LocalTransport net;
  net.attach(kA, &a.api);
  net.attach(kB, &b.api);  // c is down throughout
  MonitorOptions options;
  options.interval = 1ms;
  options.rounds = 5;
  options.seed = 9;
  std::stringstream sink;
  EXPECT_EQ(monitorLoop(net, {kA, kB, kC}, options, sink), 15u);
  auto log = readProbeLog(sink);
  ASSERT_EQ(log.size(), 15u);
  for (const auto& r : log) {
    if (r.serverUrl == kC) {
      EXPECT_TRUE(r.error);
    } else {
      EXPECT_FALSE(r.error);
      EXPECT_EQ(r.verified, true);
    }
  }
  auto summary = summarize(log);
  EXPECT_DOUBLE_EQ(summary[kA].successRate, 1.0);
  EXPECT_DOUBLE_EQ(summary[kB].successRate, 1.0);
  EXPECT_DOUBLE_EQ(summary[kC].successRate, 0.0);
  EXPECT_EQ(summary[kC].errors, 5u);
  EXPECT_FALSE(summary[kC].p50);
}

TEST(Monitor, LoopStopsOnRequest) {
  LocalTransport net;
  MonitorOptions options;
  options.interval = 10s;
  std::stringstream sink;
  std::stop_source stop;
  stop.request_stop();
  EXPECT_EQ(monitorLoop(net, {kA}, options, sink, stop.get_token()), 0u);
}

TEST(Monitor, CsvRoundTripIsLossless) {
  std::vector<ProbeResult> rows(3);
  rows[0].serverUrl = kA;
  rows[0].timestamp = csv::parseTimestamp("2026-01-02T03:04:05.006Z");
  rows[0].infoLatency = std::chrono::microseconds(1234);
  rows[0].fetchLatency = std::chrono::microseconds(56789);
  rows[0].verified = true;
  rows[0].nanopubCount = 10000;
  rows[1].serverUrl = kB;
  rows[1].timestamp = csv::parseTimestamp("2026-01-02T03:04:06.000Z");
  rows[1].error = "cannot fetch http://b.local:2/: Connection, \"refused\"";
  rows[2].serverUrl = kC;
  rows[2].timestamp = csv::parseTimestamp("2026-01-02T03:04:07.999Z");
  rows[2].infoLatency = std::chrono::microseconds(1);
  rows[2].fetchLatency = std::chrono::microseconds(2);
  rows[2].verified = false;
  rows[2].nanopubCount = 7;
  std::stringstream text;
  text << kProbeCsvHeader << "\n";
  for (const auto& r : rows) text << formatProbe(r) << "\n";
  EXPECT_EQ(readProbeLog(text), rows);
  EXPECT_THROW(parseProbe("a,b,c"), Error);
}

TEST(Monitor, SummaryOfKnownLog) {
  const std::vector<std::pair<double, double>> timings = {
      {12.5, 20.1}, {3.2, 33.0}, {7.75, 18.2}, {101.0, 250.75}, {4.4, 19.9},
      {5.0, 21.0},  {6.125, 22.5}, {2.9, 17.4}, {8.0, 30.0},   {15.3, 45.6}};
  std::vector<ProbeResult> log;
  for (auto [info, fetch] : timings) {
    ProbeResult r;
    r.serverUrl = kA;
    r.infoLatency = ms(info);
    r.fetchLatency = ms(fetch);
    r.verified = true;
    r.nanopubCount = 100;
    log.push_back(r);
  }
  auto s = summarize(log).at(kA);
  EXPECT_EQ(s.probes, 10u);
  EXPECT_EQ(s.p50, ms(17.4));
  EXPECT_EQ(s.p99, ms(250.75));
  EXPECT_EQ(s.max, ms(250.75));
  EXPECT_DOUBLE_EQ(s.successRate, 1.0);
  EXPECT_EQ(s.verifyFailures, 0u);

  std::vector<std::chrono::microseconds> samples;
  for (auto [info, fetch] : timings) {
    samples.push_back(ms(info));
    samples.push_back(ms(fetch));
  }
  EXPECT_EQ(nearestRank(samples, 90), ms(45.6));
  EXPECT_EQ(nearestRank(samples, 5), ms(2.9));
}

TEST(Monitor, SummaryRates) {
  std::vector<ProbeResult> log(100);
  for (auto& r : log) {
    r.serverUrl = kA;
    r.infoLatency = 1ms;
    r.fetchLatency = 2ms;
    r.verified = true;
  }
  log[17].verified = false;
  auto s = summarize(log).at(kA);
  EXPECT_DOUBLE_EQ(s.successRate, 0.99);
  EXPECT_EQ(s.verifyFailures, 1u);
  EXPECT_LE(*s.p50, *s.p99);
  EXPECT_LE(*s.p99, *s.max);
  EXPECT_THROW(summarize({}), Error);
}
