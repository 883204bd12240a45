#pragma once

// Pull-based replication. A server visits its peers one at a time, reads
// their info, and pulls everything past the position it saw last: complete
// pages as packages, the trailing page as a listing plus single fetches.
// Every nanopub is verified before it is stored, so a misbehaving peer can
// waste bandwidth but cannot inject content.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stop_token>
#include <string>

#include "nanomesh/peers.h"
#include "nanomesh/store.h"
#include "nanomesh/transport.h"

namespace nanomesh {

using Clock = std::chrono::steady_clock;

struct PeerState {
  std::string url;
  std::optional<std::uint64_t> lastSeenJournalId;
  // Journal positions 1..lastSeenCount of the peer have been processed.
  std::uint64_t lastSeenCount = 0;
  std::optional<Clock::time_point> lastVisit;
  std::uint32_t consecutiveFailures = 0;
  Clock::time_point nextVisit{};
};

struct SyncReport {
  std::string peer;
  // Nanopubs not yet stored locally that were attempted.
  std::size_t newNanopubs = 0;
  std::size_t verifiedOk = 0;
  std::size_t verifyFailures = 0;
  std::size_t packageFetches = 0;
  std::size_t pageFetches = 0;
  std::size_t nanopubFetches = 0;
  bool journalReset = false;
  std::chrono::milliseconds duration{0};
  std::optional<std::string> error;  // network failure; progress so far kept
};

struct ReplicatorOptions {
  std::chrono::milliseconds interval{10000};
  // Failing peers wait interval * 2^failures, capped at this factor.
  std::uint32_t maxBackoffFactor = 16;
};

class Replicator {
 public:
  Replicator(Store& store, PeerSet& peers, Transport& transport,
             ReplicatorOptions options = {});

  // Concurrent callers are serialized: only one sync runs at any instant.
  SyncReport syncOnce(const std::string& peerUrl);

  // One pass over all peers that are due. Returns the reports.
  std::vector<SyncReport> runRound();

  // Rounds separated by the interval until stop is requested. Peers are
  // re-read every round; announcements are retried until they succeed.
  void runLoop(std::stop_token stop);

  // POSTs our public URL to the peer's peer list. Best effort.
  bool announceTo(const std::string& peerUrl);

  PeerState state(const std::string& peerUrl) const;
  // Highest number of syncs observed running at once.
  int maxConcurrentSyncs() const { return maxActive_; }

 private:
  void processPage(const std::string& peer, std::uint64_t page, bool complete,
                   SyncReport& report);
  void storeVerified(std::vector<Nanopub>& candidates, SyncReport& report);

  Store& store_;
  PeerSet& peers_;
  Transport& transport_;
  ReplicatorOptions options_;

  std::mutex syncMutex_;
  std::atomic<int> active_{0};
  std::atomic<int> maxActive_{0};
  mutable std::mutex stateMutex_;
  std::map<std::string, PeerState> states_;
  std::set<std::string> announced_;
};

// Parses one `SYNC peer=<url> new=<n> failed=<n> ms=<t>` log line.
std::optional<SyncReport> parseSyncLine(std::string_view line);
std::string formatSyncLine(const SyncReport& report);

}  // namespace nanomesh
