#include "nanomesh/replicator.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <sstream>

#include "nanomesh/batch.h"
#include "nanomesh/errors.h"
#include "nanomesh/remote.h"

namespace nanomesh {

namespace {

// Keeps the active-sync counters honest on every exit path.
class ActiveGuard {
 public:
  ActiveGuard(std::atomic<int>& active, std::atomic<int>& maxActive) : active_(active) {
    int now = ++active_;
    int seen = maxActive.load();
    while (now > seen && !maxActive.compare_exchange_weak(seen, now)) {
    }
  }
  ~ActiveGuard() { --active_; }

 private:
  std::atomic<int>& active_;
};

}  // namespace

Replicator::Replicator(Store& store, PeerSet& peers, Transport& transport,
                       ReplicatorOptions options)
    : store_(store), peers_(peers), transport_(transport), options_(options) {}

PeerState Replicator::state(const std::string& peerUrl) const {
  std::lock_guard lock(stateMutex_);
  auto it = states_.find(peerUrl);
  if (it != states_.end()) return it->second;
  PeerState fresh;
  fresh.url = peerUrl;
  return fresh;
}

void Replicator::storeVerified(std::vector<Nanopub>& candidates, SyncReport& report) {
  if (candidates.empty()) return;
  auto ok = batch::verifyAll(candidates);
  std::vector<Nanopub> good;
  good.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (ok[i]) {
      good.push_back(std::move(candidates[i]));
    } else {
      ++report.verifyFailures;
      spdlog::warn("rejected {} from {}: does not verify", candidates[i].uri(), report.peer);
    }
  }
  // putBatch checks the codes once more before anything is written.
  store_.putBatch(good);
  report.verifiedOk += good.size();
  candidates.clear();
}

void Replicator::processPage(const std::string& peer, std::uint64_t page, bool complete,
                             SyncReport& report) {
  std::vector<Nanopub> candidates;
  if (complete) {
    ++report.packageFetches;
    for (auto& item : remote::fetchPackage(transport_, peer, page)) {
      auto claimed = ArtifactCode::tryParse(item.code);
      if (claimed && store_.contains(*claimed)) continue;
      ++report.newNanopubs;
      try {
        candidates.push_back(parseNanopubBytes(item.bytes));
      } catch (const Error& err) {
        ++report.verifyFailures;
        spdlog::warn("rejected package item {} from {}: {}", item.code, peer, err.what());
      }
    }
  } else {
    ++report.pageFetches;
    for (const auto& code : remote::fetchPage(transport_, peer, page)) {
      if (store_.contains(code)) continue;
      ++report.newNanopubs;
      ++report.nanopubFetches;
      try {
        candidates.push_back(remote::fetchVerified(transport_, peer, code));
      } catch (const VerificationError& err) {
        ++report.verifyFailures;
        spdlog::warn("rejected {}", err.what());
      }
    }
  }
  storeVerified(candidates, report);
}

SyncReport Replicator::syncOnce(const std::string& peerUrl) {
  std::lock_guard serial(syncMutex_);
  ActiveGuard guard(active_, maxActive_);
  const auto start = Clock::now();
  SyncReport report;
  report.peer = peerUrl;
  PeerState st = state(peerUrl);
  auto save = [&] {
    std::lock_guard lock(stateMutex_);
    states_[peerUrl] = st;
  };

  try {
    ServerInfo info = remote::fetchInfo(transport_, peerUrl);
    if (st.lastSeenJournalId != info.journalId) {
      // Unknown or new journal: the peer's positions mean nothing to us now.
      report.journalReset = st.lastSeenJournalId.has_value();
      st.lastSeenJournalId = info.journalId;
      st.lastSeenCount = 0;
      save();
    }
    const std::uint64_t count = info.nanopubCount;
    const std::uint64_t pageSize = info.pageSize;
    if (count > st.lastSeenCount) {
      const std::uint64_t firstPage = st.lastSeenCount / pageSize + 1;
      const std::uint64_t lastPage = (count + pageSize - 1) / pageSize;
      for (std::uint64_t page = firstPage; page <= lastPage; ++page) {
        const bool complete = page * pageSize <= count;
        const std::size_t failuresBefore = report.verifyFailures;
        processPage(peerUrl, page, complete, report);
        if (report.verifyFailures != failuresBefore) {
          // Leave the checkpoint before this page so it is retried later.
          break;
        }
        st.lastSeenCount = complete ? page * pageSize : count;
        save();
      }
    }
    try {
      std::size_t added = peers_.merge(remote::fetchPeers(transport_, peerUrl));
      if (added > 0) spdlog::info("learned {} peer(s) from {}", added, peerUrl);
    } catch (const FetchError& err) {
      spdlog::debug("peer list of {} unavailable: {}", peerUrl, err.what());
    }
    st.consecutiveFailures = 0;
  } catch (const Error& err) {
    report.error = err.what();
    ++st.consecutiveFailures;
  }

  const auto end = Clock::now();
  st.lastVisit = end;
  std::uint32_t factor = 1;
  for (std::uint32_t i = 0; i < st.consecutiveFailures && factor < options_.maxBackoffFactor; ++i) {
    factor *= 2;
  }
  factor = std::min(factor, options_.maxBackoffFactor);
  st.nextVisit = st.consecutiveFailures == 0 ? end : end + options_.interval * factor;
  save();

  report.duration = std::chrono::duration_cast<std::chrono::milliseconds>(end - start);
  if (report.error) {
    spdlog::warn("{} error=\"{}\"", formatSyncLine(report), *report.error);
  } else if (report.newNanopubs > 0 || report.verifyFailures > 0) {
    spdlog::info("{}", formatSyncLine(report));
  } else {
    spdlog::debug("{}", formatSyncLine(report));
  }
  return report;
}

bool Replicator::announceTo(const std::string& peerUrl) {
  std::lock_guard serial(syncMutex_);
  try {
    int status = remote::postPeer(transport_, peerUrl, peers_.selfUrl());
    if (status == 200 || status == 202) {
      std::lock_guard lock(stateMutex_);
      announced_.insert(peerUrl);
      return true;
    }
    spdlog::warn("announcing to {} got HTTP {}", peerUrl, status);
  } catch (const Error& err) {
    spdlog::warn("announcing to {} failed: {}", peerUrl, err.what());
  }
  return false;
}

std::vector<SyncReport> Replicator::runRound() {
  std::vector<SyncReport> reports;
  for (const auto& peer : peers_.list()) {
    bool needsAnnounce = false;
    {
      std::lock_guard lock(stateMutex_);
      needsAnnounce = !announced_.contains(peer);
    }
    if (Clock::now() < state(peer).nextVisit) continue;
    if (needsAnnounce) announceTo(peer);
    reports.push_back(syncOnce(peer));
  }
  return reports;
}

void Replicator::runLoop(std::stop_token stop) {
  std::mutex mutex;
  std::condition_variable_any wake;
  while (!stop.stop_requested()) {
    try {
      runRound();
    } catch (const std::exception& err) {
      spdlog::error("replication round failed: {}", err.what());
    }
    std::unique_lock lock(mutex);
    wake.wait_for(lock, stop, options_.interval, [] { return false; });
  }
}

std::string formatSyncLine(const SyncReport& report) {
  return "SYNC peer=" + report.peer + " new=" + std::to_string(report.verifiedOk) +
         " failed=" + std::to_string(report.verifyFailures) +
         " ms=" + std::to_string(report.duration.count());
}

std::optional<SyncReport> parseSyncLine(std::string_view line) {
  std::size_t at = line.find("SYNC peer=");
  if (at == std::string_view::npos) return std::nullopt;
  std::istringstream in{std::string(line.substr(at + 5))};
  SyncReport report;
  std::string token;
  int seen = 0;
  auto number = [](std::string_view s, std::size_t& out) {
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && end == s.data() + s.size();
  };
  while (in >> token) {
    std::size_t eq = token.find('=');
    if (eq == std::string::npos) continue;
    std::string key = token.substr(0, eq);
    std::string_view value = std::string_view(token).substr(eq + 1);
    std::size_t n = 0;
    if (key == "peer") {
      report.peer = std::string(value);
      ++seen;
    } else if (key == "new" && number(value, n)) {
      report.verifiedOk = n;
      ++seen;
    } else if (key == "failed" && number(value, n)) {
      report.verifyFailures = n;
      ++seen;
    } else if (key == "ms" && number(value, n)) {
      report.duration = std::chrono::milliseconds(n);
      ++seen;
    }
  }
  if (seen != 4) return std::nullopt;
  report.newNanopubs = report.verifiedOk + report.verifyFailures;
  return report;
}

}  // namespace nanomesh
