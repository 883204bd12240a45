#pragma once

// Durable content-addressed storage with an append-only journal.
//
// Layout of a store directory:
//
//   meta                 "journal-id: <u64>" and "page-size: <n>" lines
//   journal              one 46-byte record per nanopub: 45-char code + '\n'
//   np/<xy>/<code>       canonical line-quads bytes; xy = first two digest chars
//   packages/<p>.gz      cached packages of complete pages
//   lock                 flock'ed while a Store is open
//
// The journal is the commit point. A put writes and syncs the content file
// first and appends the journal record after, so an interrupted put leaves
// at most an orphan content file, which a later put of the same code simply
// overwrites. A torn trailing record is cut off on open.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nanomesh/constants.h"
#include "nanomesh/rdf.h"
#include "nanomesh/trusty.h"

namespace nanomesh {

struct StoreOptions {
  // Only used when creating a store; an existing store keeps its page size.
  std::size_t pageSize = kDefaultPageSize;
  // fsync content files, the journal and directories. Off only in tests that
  // do not care about power loss.
  bool sync = true;
  bool cachePackages = true;
};

struct StoreInfo {
  std::uint64_t journalId = 0;
  std::uint64_t nanopubCount = 0;
  std::size_t pageSize = 0;
};

struct StoreEntry {
  ArtifactCode code;
  std::string bytes;
  std::uint64_t position = 0;
};

struct JournalPage {
  std::uint64_t pageNumber = 0;
  std::vector<ArtifactCode> entries;
  bool isComplete = false;
};

struct PutResult {
  bool added = false;
  // Journal position, also for codes that were already present.
  std::uint64_t position = 0;
};

struct LoadReport {
  std::size_t added = 0;
  std::size_t alreadyPresent = 0;
  std::vector<std::string> errors;
};

struct IntegrityReport {
  std::uint64_t entries = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

// Canonical stored form: the nanopub's statements, sorted bytewise.
std::string canonicalBytes(const Nanopub& np);

// Parses stored or transferred bytes back into a nanopub (no verification).
Nanopub parseNanopubBytes(std::string_view bytes);

// Package payload before compression: for each nanopub `# <code>\n`
// followed by its canonical bytes.
std::string renderPackage(std::span<const StoreEntry> entries);

struct PackageItem {
  std::string code;  // as claimed by the comment line; not trusted
  std::string bytes;
};
// Throws SyntaxError if the text does not start with a code comment.
std::vector<PackageItem> splitPackage(std::string_view text);

class Store {
 public:
  // Creates the directory and a fresh journal id if needed. Throws
  // StoreError when the directory is locked by another process or the
  // journal is damaged beyond a torn tail.
  static std::unique_ptr<Store> open(const std::filesystem::path& dir,
                                     const StoreOptions& options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // Throws TrustyError if `np` does not verify; nothing is persisted then.
  PutResult put(const Nanopub& np);
  // All-or-nothing verification, then one journal append for the batch.
  std::vector<PutResult> putBatch(std::span<const Nanopub> nps);

  // Throws StoreError if the stored bytes no longer verify.
  std::optional<StoreEntry> get(const ArtifactCode& code) const;
  bool contains(const ArtifactCode& code) const;

  // Pages are 1-indexed. Page 1 exists even in an empty store. Throws
  // NotFoundError out of range.
  JournalPage getPage(std::uint64_t pageNumber) const;
  std::uint64_t lastPage() const;

  // Gzipped package of a complete page. Throws NotFoundError for unknown or
  // incomplete pages.
  std::string getPackage(std::uint64_t pageNumber) const;

  StoreInfo info() const;

  // Inputs must already be trusty. Bad files and bad nanopubs are reported
  // in `errors` and skipped.
  LoadReport loadFromFiles(std::span<const std::filesystem::path> paths);

  // Reads and verifies every journaled entry.
  IntegrityReport checkIntegrity() const;

  const std::filesystem::path& directory() const { return dir_; }

 private:
  Store(std::filesystem::path dir, StoreOptions options);
  std::filesystem::path contentPath(std::string_view code) const;
  std::optional<std::string> readContent(std::string_view code) const;
  std::string buildPackage(std::uint64_t pageNumber) const;
  std::vector<PutResult> putVerified(std::span<const Nanopub> nps,
                                     std::span<const ArtifactCode> codes);

  std::filesystem::path dir_;
  StoreOptions options_;
  std::uint64_t journalId_ = 0;
  int lockFd_ = -1;
  int journalFd_ = -1;

  std::mutex writer_;
  mutable std::shared_mutex state_;
  std::vector<std::string> codes_;  // position k at index k-1
  std::unordered_map<std::string, std::uint64_t> positions_;
};

}  // namespace nanomesh
