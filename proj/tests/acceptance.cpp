// End-to-end acceptance run. Prints one PASS or FAIL line per criterion and
// exits non-zero if any criterion fails.
//
//   acceptance [--only 1,3,8] [--work DIR] [--keep]

#include <CLI11.hpp>
#include <signal.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "nanomesh/batch.h"
#include "nanomesh/config.h"
#include "nanomesh/corpus.h"
#include "nanomesh/errors.h"
#include "nanomesh/harness.h"
#include "nanomesh/index.h"
#include "nanomesh/monitor.h"
#include "nanomesh/rdf_io.h"
#include "nanomesh/store.h"
#include "nanomesh/transport.h"
#include "nanomesh/trusty.h"
#include "test_support.h"

using namespace nanomesh;
using namespace std::chrono_literals;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int decimals = 1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string shellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

struct CommandResult {
  int status = -1;
  std::string out;
};

// Runs a command in `cwd`, capturing stdout; stderr is appended to
// `cwd/stderr.log`.
CommandResult runCommand(const fs::path& cwd, const std::vector<std::string>& argv) {
  std::string command = "cd " + shellQuote(cwd.string()) + " &&";
  for (const auto& a : argv) command += " " + shellQuote(a);
  command += " 2>>" + shellQuote((cwd / "stderr.log").string());
  CommandResult result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) throw Error("cannot run " + argv.front());
  std::array<char, 4096> buf;
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), n);
  int status = ::pclose(pipe);
  result.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::set<std::string> storedCodes(const Store& store) {
  std::set<std::string> out;
  for (std::uint64_t p = 1; p <= store.lastPage(); ++p) {
    for (const auto& c : store.getPage(p).entries) out.insert(c.str());
  }
  return out;
}

// Reopens a stopped server's store and checks every entry.
IntegrityReport fsckDir(const fs::path& dir) {
  auto store = Store::open(dir);
  return store->checkIntegrity();
}

// Polls until every server reports `total`. Returns false on timeout.
bool waitForCounts(const LocalNetwork& net, std::uint64_t total, std::chrono::seconds timeout,
                   std::string& detail) {
  auto deadline = Clock::now() + timeout;
  while (true) {
    auto counts = net.counts();
    bool done = std::all_of(counts.begin(), counts.end(),
                            [&](const auto& c) { return c && *c == total; });
    detail.clear();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      detail += (i ? "/" : "") + (counts[i] ? std::to_string(*counts[i]) : std::string("down"));
    }
    if (done) return true;
    if (Clock::now() >= deadline) return false;
    std::this_thread::sleep_for(200ms);
  }
}

std::vector<ArtifactCode> codesOf(const std::vector<Nanopub>& nps) {
  std::vector<ArtifactCode> out;
  for (const auto& np : nps) out.push_back(TrustyUri::parse(np.uri()).code);
  return out;
}

void writeCorpus(const fs::path& file, std::span<const Nanopub> nps) {
  std::vector<Quad> quads;
  for (const auto& np : nps) quads.insert(quads.end(), np.quads().begin(), np.quads().end());
  writeFile(file, serializeQuads(quads, formatForPath(file)));
}

class Acceptance {
 public:
  Acceptance(fs::path work, fs::path tools, fs::path tamperpeer)
      : work_(std::move(work)), tools_(std::move(tools)), tamperpeer_(std::move(tamperpeer)) {}

  Outcome hashing();
  Outcome indexAlgebra();
  Outcome singleSource();
  Outcome multiSource();
  Outcome throughput();
  Outcome retrievalLoad();
  Outcome monitorSoundness();
  Outcome cliTranscript();
  Outcome adversarialPeer();
  Outcome crashConsistency();

 private:
  NetworkOptions networkOptions(const fs::path& dir, std::size_t pageSize = kDefaultPageSize) const {
    NetworkOptions o;
    o.serverBinary = tools_ / "npserver";
    o.workDir = dir;
    o.serverCount = 3;
    o.pageSize = pageSize;
    o.loopInterval = 1s;
    return o;
  }
  const RunMetrics& singleSourceRun();
  const RunMetrics& multiSourceRun();

  fs::path work_;
  fs::path tools_;
  fs::path tamperpeer_;
  std::optional<RunMetrics> single_;
  std::optional<RunMetrics> multi_;
};

Outcome Acceptance::hashing() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20160415);
  std::vector<Nanopub> pending;
  for (int i = 0; i < 1000; ++i) {
    pending.push_back(syntheticNanopub(rng, "http://example.org/acc/np" + std::to_string(i) + "#"));
  }
  std::size_t verified = 0;
  std::vector<Nanopub> trusty;
  for (const auto& np : pending) {
    trusty.push_back(makeTrusty(np));
    verified += verify(trusty.back());
  }
  std::size_t rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    const Nanopub& np = trusty[rng() % trusty.size()];
    Nanopub mutated = assembleNanopub(testing::mutateOneLiteral(np, rng));
    rejected += !verify(mutated);
  }
  std::size_t invariant = 0;
  for (int i = 0; i < 50; ++i) {
    const Nanopub& np = trusty[i];
    const ArtifactCode code = TrustyUri::parse(np.uri()).code;
    for (int k = 0; k < 100; ++k) {
      std::vector<Quad> quads = np.quads();
      std::shuffle(quads.begin(), quads.end(), rng);
      Nanopub permuted = assembleNanopub(std::move(quads));
      invariant += computeCode(permuted) == code && verify(permuted);
    }
  }
  double took = secondsSince(start);
  bool pass = verified == 1000 && rejected == 1000 && invariant == 5000 && took < 60;
  return {pass, std::to_string(verified) + "/1000 verify, " + std::to_string(rejected) +
                    "/1000 mutations rejected, " + std::to_string(invariant) +
                    "/5000 permutations invariant, " + fixed(took) + " s (limit 60 s)"};
}

Outcome Acceptance::indexAlgebra() {
  const auto start = Clock::now();
  std::mt19937_64 rng(100000);
  std::vector<std::string> elements;
  for (int i = 0; i < 100000; ++i) {
    std::array<std::uint8_t, 32> digest;
    for (auto& b : digest) b = static_cast<std::uint8_t>(rng());
    digest[31] &= 0xfc;
    elements.push_back("http://example.org/item" + std::to_string(i) + "/" +
                       ArtifactCode::fromDigest(digest).str());
  }
  auto chain = buildIndexChain(elements, std::string("one hundred thousand"));
  std::map<std::string, Nanopub> byUri;
  for (const auto& node : chain) byUri.emplace(node.nanopub.uri(), node.nanopub);
  FetchFn fetch = [&](const TrustyUri& uri) {
    auto it = byUri.find(uri.str());
    if (it == byUri.end()) throw FetchError(uri.str(), "not found");
    return it->second;
  };
  ResolvedSet set = resolveIndex(chain.back().uri(), fetch);
  bool inOrder = set.members.size() == elements.size();
  for (std::size_t i = 0; inOrder && i < elements.size(); ++i) {
    inOrder = set.members[i].str() == elements[i];
  }

  // The two-index hierarchy: (a) = 2 elements + sub-index c; (b) = sub-indexes
  // c and f, where f appends to e which appends to d.
  auto data = genCorpus(13, 2015);
  std::map<std::string, Nanopub> lib;
  std::vector<TrustyUri> elems;
  for (const auto& np : data) {
    lib.emplace(np.uri(), np);
    elems.push_back(TrustyUri::parse(np.uri()));
  }
  auto slice = [&](std::size_t from, std::size_t n) {
    return std::vector<TrustyUri>(elems.begin() + from, elems.begin() + from + n);
  };
  IndexNode c = makeIndexNode(slice(0, 3), {}, std::nullopt, "c", false);
  IndexNode d = makeIndexNode(slice(3, 3), {}, std::nullopt, "d", false);
  IndexNode e = makeIndexNode(slice(6, 3), {}, d.uri(), "e", false);
  IndexNode f = makeIndexNode(slice(9, 2), {}, e.uri(), "f", false);
  IndexNode a = makeIndexNode(slice(11, 2), std::vector{c.uri()}, std::nullopt, "a", false);
  IndexNode b = makeIndexNode({}, std::vector{c.uri(), f.uri()}, std::nullopt, "b", false);
  for (const auto* node : {&a, &b, &c, &d, &e, &f}) lib.emplace(node->nanopub.uri(), node->nanopub);
  FetchFn fetchLib = [&](const TrustyUri& uri) {
    auto it = lib.find(uri.str());
    if (it == lib.end()) throw FetchError(uri.str(), "not found");
    return it->second;
  };
  std::size_t membersA = resolveIndex(a.uri(), fetchLib).members.size();
  std::size_t membersB = resolveIndex(b.uri(), fetchLib).members.size();

  double took = secondsSince(start);
  bool pass = chain.size() == 100 && inOrder && membersA == 5 && membersB == 11 && took < 120;
  return {pass, std::to_string(chain.size()) + " index nanopubs, " +
                    std::to_string(set.members.size()) + " members " +
                    (inOrder ? "in order" : "NOT in order") + ", hierarchy a=" +
                    std::to_string(membersA) + " b=" + std::to_string(membersB) + ", " +
                    fixed(took) + " s (limit 120 s)"};
}

const RunMetrics& Acceptance::singleSourceRun() {
  if (!single_) {
    NetworkPlan plan;
    plan.network = networkOptions(work_ / "c3");
    plan.assignments = {10000, 0, 0};
    plan.corpusSeed = 3;
    plan.timeout = 300s;
    plan.spotChecks = 100;
    single_ = runReplicationExperiment(plan);
  }
  return *single_;
}

const RunMetrics& Acceptance::multiSourceRun() {
  if (!multi_) {
    NetworkPlan plan;
    plan.network = networkOptions(work_ / "c4");
    plan.assignments = {4000, 3000, 3000};
    plan.corpusSeed = 4;
    plan.timeout = 300s;
    plan.spotChecks = 100;
    multi_ = runReplicationExperiment(plan);
  }
  return *multi_;
}

Outcome Acceptance::singleSource() {
  const RunMetrics& m = singleSourceRun();
  bool pass = m.totalReplicated == 10000 && m.verifyFailures == 0 &&
              m.convergenceTime <= std::chrono::seconds(300);
  return {pass, "10000 at one of 3 servers, converged in " +
                    fixed(m.convergenceTime.count() / 1000.0) +
                    " s (limit 300 s), 100 spot checks per server verified, " +
                    std::to_string(m.verifyFailures) + " verification failures"};
}

Outcome Acceptance::multiSource() {
  const RunMetrics& m = multiSourceRun();
  bool pass = m.totalReplicated == 10000 && m.verifyFailures == 0 &&
              m.convergenceTime <= std::chrono::seconds(300);
  return {pass, "4000/3000/3000 loads, converged to 10000 everywhere in " +
                    fixed(m.convergenceTime.count() / 1000.0) + " s (limit 300 s), " +
                    std::to_string(m.verifyFailures) + " verification failures"};
}

Outcome Acceptance::throughput() {
  double single = singleSourceRun().replicationThroughput() / 3600.0;
  double multi = multiSourceRun().replicationThroughput() / 3600.0;
  double worst = std::min(single, multi);
  return {worst >= 100, "end-to-end " + fixed(single) + "/s single-source, " + fixed(multi) +
                            "/s multi-source (floor 100/s)"};
}

Outcome Acceptance::retrievalLoad() {
  singleSourceRun();
  NetworkOptions options = networkOptions(work_ / "c3");
  options.serverCount = 1;
  LocalNetwork net(options);
  net.start(0);
  LoadPlan plan;
  plan.targetServer = net.url(0);
  plan.maxClients = 50;
  plan.rampDuration = 120s;
  plan.fetchProbability = 0.10;
  plan.requestTimeout = 60s;
  RunMetrics m = runLoadExperiment(plan);
  reportRun(m, work_ / "c6");
  net.stopAll();
  const ClientBucket& top = m.latencyByClientCount.back();
  double medianMs = top.p50.count() / 1000.0;
  bool pass = m.errorCount == 0 && m.timeoutCount == 0 && top.clients == 50 && medianMs < 50 &&
              m.requestsPerSecond() > 377;
  return {pass, std::to_string(m.requestCount) + " requests, " + std::to_string(m.errorCount) +
                    " errors, " + std::to_string(m.timeoutCount) + " timeouts, " +
                    fixed(m.requestsPerSecond()) + " req/s (floor 377), median " + fixed(medianMs, 2) +
                    " ms at " + std::to_string(top.clients) + " clients (limit 50 ms)"};
}

Outcome Acceptance::monitorSoundness() {
  singleSourceRun();
  LocalNetwork net(networkOptions(work_ / "c3"));
  net.startAll();
  std::vector<std::string> servers;
  for (std::size_t i = 0; i < net.size(); ++i) servers.push_back(net.url(i));

  HttpTransport transport;
  MonitorOptions options;
  options.interval = 1s;
  options.rounds = 10;
  options.seed = 7;
  fs::create_directories(work_ / "c7");
  std::ofstream log(work_ / "c7" / "monitor.csv");
  log << kProbeCsvHeader << "\n";
  monitorLoop(transport, servers, options, log);
  log.close();
  std::ifstream in(work_ / "c7" / "monitor.csv");
  auto summary = summarize(readProbeLog(in));
  std::size_t probes = 0;
  std::size_t failures = 0;
  bool allSuccess = summary.size() == 3;
  for (const auto& [server, s] : summary) {
    probes += s.probes;
    failures += s.verifyFailures;
    allSuccess = allSuccess && s.successRate == 1.0;
  }

  int port = freePort();
  std::string tamperUrl = "http://127.0.0.1:" + std::to_string(port) + "/";
  std::size_t tamperedVerified = 0;
  std::size_t tamperedFlagged = 0;
  {
    auto proxy = ChildProcess::spawn({tamperpeer_.string(), "--listen",
                                      "127.0.0.1:" + std::to_string(port), "--upstream",
                                      net.url(0), "--every", "1"},
                                     work_ / "c7" / "tamperpeer.log");
    if (!waitForServer(tamperUrl, 30s)) throw Error("tampering proxy did not start");
    MonitorOptions quick;
    quick.interval = 100ms;
    quick.rounds = 5;
    std::stringstream rows;
    monitorLoop(transport, {tamperUrl}, quick, rows);
    for (const auto& r : readProbeLog(rows)) {
      tamperedVerified += r.verified == true;
      tamperedFlagged += r.verified == false;
    }
  }
  net.stopAll();
  bool pass = probes == 30 && allSuccess && failures == 0 && tamperedFlagged == 5 &&
              tamperedVerified == 0;
  return {pass, std::to_string(probes) + " probes over 3 servers, successRate " +
                    (allSuccess ? "1.0" : "below 1.0") + ", " + std::to_string(failures) +
                    " verification failures; tampering double flagged verified=false in " +
                    std::to_string(tamperedFlagged) + "/5 probes"};
}

Outcome Acceptance::cliTranscript() {
  const fs::path dir = work_ / "c8";
  const fs::path cwd = dir / "session";
  fs::create_directories(cwd);
  fs::copy_file(testing::fixturePath("nanopubs.trig"), cwd / "nanopubs.trig",
                fs::copy_options::overwrite_existing);
  LocalNetwork net(networkOptions(dir / "network"));
  net.start(0);
  const std::string s0 = net.url(0);
  const std::string np = (tools_ / "np").string();
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const std::string code = "RA[A-Za-z0-9_-]{43}";
  auto esc = [](const std::string& s) { return std::regex_replace(s, std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)"); };

  auto mk = runCommand(cwd, {np, "mktrusty", "-v", "nanopubs.trig"});
  auto mkLines = lines(mk.out);
  std::vector<std::string> uris;
  for (const auto& line : mkLines) {
    std::smatch m;
    if (std::regex_match(line, m, std::regex("Nanopub URI: (http://example\\.org/np[123]#" + code + ")"))) {
      uris.push_back(m[1]);
    }
  }
  expect(mk.status == 0 && mkLines.size() == 3 && uris.size() == 3, "mktrusty -v");

  auto pub = runCommand(cwd, {np, "--server", s0, "publish", "trusty.nanopubs.trig"});
  expect(pub.status == 0 && pub.out == "3 nanopubs published at " + s0 + "\n", "publish");

  // The two peers join after publication.
  const std::string uri1 = uris.empty() ? "" : uris[0];
  const std::string code1 = uri1.size() >= 45 ? uri1.substr(uri1.size() - 45) : "";
  auto before = runCommand(cwd, {np, "--server", s0, "status", "-a", uri1});
  expect(before.status == 0 && before.out == "URL: " + s0 + code1 + "\nFound on 1 nanopub server.\n",
         "status right after publication");

  net.start(1);
  net.start(2);
  std::string counts;
  expect(waitForCounts(net, 3, 120s, counts), "replication of the three nanopubs (" + counts + ")");
  auto after = runCommand(cwd, {np, "--server", s0, "status", "-a", uri1});
  auto afterLines = lines(after.out);
  std::size_t urlLines = 0;
  for (const auto& line : afterLines) {
    urlLines += std::regex_match(line, std::regex("URL: http://127\\.0\\.0\\.1:[0-9]+/" + esc(code1)));
  }
  expect(after.status == 0 && urlLines == 3 && !afterLines.empty() &&
             afterLines.back() == "Found on 3 nanopub servers.",
         "status after convergence");

  auto idx = runCommand(cwd, {np, "--server", s0, "mkindex", "-o", "index.nanopubs.trig",
                              "trusty.nanopubs.trig"});
  std::smatch im;
  std::string indexUri;
  std::string idxLine = idx.out.empty() ? "" : idx.out.substr(0, idx.out.size() - 1);
  if (std::regex_match(idxLine, im, std::regex("Index URI: (" + esc(s0) + code + ")"))) indexUri = im[1];
  expect(idx.status == 0 && !indexUri.empty(), "mkindex");

  auto pubIndex = runCommand(cwd, {np, "--server", s0, "publish", "index.nanopubs.trig"});
  expect(pubIndex.status == 0 && pubIndex.out == "1 nanopub published at " + s0 + "\n",
         "publish index");

  auto get = runCommand(cwd, {np, "--server", s0, "get", "-c", indexUri});
  std::set<std::string> got;
  try {
    for (const auto& n : splitDocument(parseQuads(get.out, Format::kLineQuads))) {
      if (verify(n)) got.insert(n.uri());
    }
  } catch (const Error&) {
  }
  expect(get.status == 0 && got == std::set<std::string>(uris.begin(), uris.end()),
         "get -c returns the three nanopubs");

  net.stopAll();
  std::string detail = failures.empty()
                           ? "mktrusty, publish, status (1 then 3 servers), mkindex, publish, get -c"
                           : "failed steps:";
  for (const auto& f : failures) detail += " [" + f + "]";
  return {failures.empty(), detail};
}

Outcome Acceptance::adversarialPeer() {
  const fs::path dir = work_ / "c9";
  fs::create_directories(dir);
  auto corpus = genCorpus(10000, 9);
  writeCorpus(dir / "honest0.nq", std::span(corpus).subspan(0, 4000));
  writeCorpus(dir / "honest1.nq", std::span(corpus).subspan(4000, 3000));
  writeCorpus(dir / "hidden.nq", std::span(corpus).subspan(7000, 3000));

  // An honest server reachable only through the tampering proxy.
  const int upstreamPort = freePort();
  const std::string upstreamUrl = "http://127.0.0.1:" + std::to_string(upstreamPort) + "/";
  auto upstream = ChildProcess::spawn(
      {(tools_ / "npserver").string(), "serve", "--listen",
       "127.0.0.1:" + std::to_string(upstreamPort), "--public-url", upstreamUrl, "--data-dir",
       (dir / "hidden").string(), "--page-size", "100", "--load", (dir / "hidden.nq").string()},
      dir / "hidden.log");
  if (!waitForServer(upstreamUrl, 30s)) throw Error("hidden upstream did not start");

  int proxyPort = freePort();
  while (proxyPort == upstreamPort) proxyPort = freePort();
  const std::string proxyUrl = "http://127.0.0.1:" + std::to_string(proxyPort) + "/";
  auto proxy = ChildProcess::spawn({tamperpeer_.string(), "--listen",
                                    "127.0.0.1:" + std::to_string(proxyPort), "--upstream",
                                    upstreamUrl, "--every", "10"},
                                   dir / "tamperpeer.log");
  if (!waitForServer(proxyUrl, 30s)) throw Error("tampering proxy did not start");

  NetworkOptions options = networkOptions(dir / "network", 100);
  options.extraPeers = {proxyUrl};
  LocalNetwork net(options);
  net.start(0, {dir / "honest0.nq"});
  net.start(1, {dir / "honest1.nq"});
  net.start(2);
  const auto start = Clock::now();
  std::string counts;
  bool converged = waitForCounts(net, 10000, 300s, counts);
  double took = secondsSince(start);
  std::uint64_t detected = net.loggedVerifyFailures();
  net.stopAll();
  proxy.terminate();
  upstream.terminate();

  std::size_t tampered = 0;
  {
    std::ifstream in(dir / "tamperpeer.log");
    std::string line;
    while (std::getline(in, line)) tampered += line.find("TAMPER ") != std::string::npos;
  }
  std::set<std::string> expected;
  for (const auto& np : corpus) expected.insert(TrustyUri::parse(np.uri()).code.str());
  std::size_t corrupted = 0;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    auto store = Store::open(net.dataDir(i));
    IntegrityReport report = store->checkIntegrity();
    corrupted += report.problems.size();
    exact += storedCodes(*store) == expected;
  }
  bool pass = converged && corrupted == 0 && exact == 3 && tampered > 0 && detected > 0;
  return {pass, std::to_string(tampered) + " tampered responses served, " +
                    std::to_string(detected) + " rejected by honest servers, " +
                    std::to_string(corrupted) + " corrupted stored entries, " +
                    (converged ? "all honest servers at 10000 in " + fixed(took) + " s"
                               : "no convergence (" + counts + ")") +
                    ", " + std::to_string(exact) + "/3 stores hold exactly the corpus"};
}

Outcome Acceptance::crashConsistency() {
  const fs::path dir = work_ / "c10";
  fs::create_directories(dir);
  auto corpus = genCorpus(10000, 10);
  writeCorpus(dir / "load.nq", corpus);
  LocalNetwork net(networkOptions(dir / "network"));
  net.start(1);
  net.start(2);

  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> delayMs(150, 2500);
  int midLoadKills = 0;
  int attempts = 0;
  int badRestarts = 0;
  std::uint64_t lastEntries = 0;
  std::vector<std::string> problems;
  while (midLoadKills < 20 && attempts < 60) {
    ++attempts;
    net.start(0, {dir / "load.nq"});
    std::this_thread::sleep_for(std::chrono::milliseconds(delayMs(rng)));
    auto counts = net.counts();
    net.kill(0, SIGKILL);
    if (counts[0] && *counts[0] < corpus.size()) ++midLoadKills;
    IntegrityReport report;
    try {
      report = fsckDir(net.dataDir(0));
    } catch (const Error& err) {
      report.problems.push_back(err.what());
    }
    if (!report.ok() || report.entries < lastEntries) {
      ++badRestarts;
      for (const auto& p : report.problems) problems.push_back(p);
    }
    lastEntries = report.entries;
    if (report.entries >= corpus.size()) {
      // Everything landed; start over with an empty store so kills stay
      // inside a load.
      net.stop(1);
      net.stop(2);
      fs::remove_all(net.dataDir(0));
      fs::remove_all(net.dataDir(1));
      fs::remove_all(net.dataDir(2));
      net.start(1);
      net.start(2);
      lastEntries = 0;
    }
  }

  net.start(0, {dir / "load.nq"});
  const auto start = Clock::now();
  std::string counts;
  bool converged = waitForCounts(net, corpus.size(), 300s, counts);
  double took = secondsSince(start);
  std::size_t spotFailures = 0;
  auto codes = codesOf(corpus);
  for (std::size_t i = 0; converged && i < 3; ++i) spotFailures += net.spotCheck(i, codes, 100, rng);
  net.stopAll();
  std::size_t finalProblems = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    IntegrityReport report = fsckDir(net.dataDir(i));
    finalProblems += report.problems.size() + (report.entries != corpus.size());
  }
  bool pass = midLoadKills == 20 && badRestarts == 0 && converged && spotFailures == 0 &&
              finalProblems == 0;
  std::string detail = std::to_string(midLoadKills) + " kill -9 during bulk load (" +
                       std::to_string(attempts) + " attempts), " + std::to_string(badRestarts) +
                       " restarts with an invalid journal, " +
                       (converged ? "converged to 10000 in " + fixed(took) + " s"
                                  : "no convergence (" + counts + ")") +
                       ", final fsck problems " + std::to_string(finalProblems);
  if (!problems.empty()) detail += "; first problem: " + problems.front();
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run over real server processes", "acceptance"};
  std::vector<int> only;
  std::string work;
  bool keep = false;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--work", work, "Working directory (default: a fresh temp directory)");
  app.add_flag("--keep", keep, "Keep the working directory");
  CLI11_PARSE(app, argc, argv);
  initLogging("warn");

  fs::path workDir = work.empty() ? fs::temp_directory_path() /
                                        ("nanomesh-acceptance-" + std::to_string(::getpid()))
                                  : fs::path(work);
  fs::create_directories(workDir);
  Acceptance acc(workDir, NANOMESH_TOOLS_DIR, NANOMESH_TAMPERPEER);

  std::vector<Criterion> criteria = {
      {1, "hash and verification suite", [&] { return acc.hashing(); }},
      {2, "index algebra", [&] { return acc.indexAlgebra(); }},
      {3, "eventual consistency, single source", [&] { return acc.singleSource(); }},
      {4, "multi-source flow", [&] { return acc.multiSource(); }},
      {5, "replication throughput", [&] { return acc.throughput(); }},
      {6, "retrieval load", [&] { return acc.retrievalLoad(); }},
      {7, "monitor soundness", [&] { return acc.monitorSoundness(); }},
      {8, "CLI transcript", [&] { return acc.cliTranscript(); }},
      {9, "adversarial peer", [&] { return acc.adversarialPeer(); }},
      {10, "crash consistency", [&] { return acc.crashConsistency(); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& err) {
      outcome = {false, std::string("error: ") + err.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " " << c.number << " " << c.name << ": "
              << outcome.detail << " [" << fixed(secondsSince(start)) << " s]" << std::endl;
  }
  if (!keep && failed == 0) fs::remove_all(workDir);
  if (failed > 0) std::cout << "work directory kept at " << workDir.string() << "\n";
  return failed == 0 ? 0 : 1;
}
