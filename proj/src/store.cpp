#include "nanomesh/store.h"

#include <fcntl.h>
#include <openssl/rand.h>
#include <spdlog/spdlog.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "nanomesh/batch.h"
#include "nanomesh/errors.h"
#include "nanomesh/gzip.h"
#include "nanomesh/rdf_io.h"

namespace nanomesh {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kRecordSize = kArtifactCodeLength + 1;
constexpr std::size_t kLoadChunk = 1000;

[[noreturn]] void throwErrno(const std::string& what) {
  throw StoreError(what + ": " + std::strerror(errno));
}

void writeAll(int fd, std::string_view data, const std::string& what) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throwErrno(what);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void writeFileDurably(const fs::path& path, std::string_view data, bool sync) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throwErrno("cannot create " + path.string());
  try {
    writeAll(fd, data, "cannot write " + path.string());
    if (sync && ::fsync(fd) != 0) throwErrno("fsync " + path.string());
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

// Write to a temporary sibling, then rename over the target.
void replaceFile(const fs::path& path, std::string_view data, bool sync) {
  std::ostringstream tmpName;
  tmpName << path.filename().string() << ".tmp." << ::getpid() << "."
          << std::hash<std::thread::id>{}(std::this_thread::get_id());
  fs::path tmp = path.parent_path() / tmpName.str();
  writeFileDurably(tmp, data, sync);
  fs::rename(tmp, path);
}

void syncDirectory(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) throwErrno("cannot open " + dir.string());
  ::fsync(fd);
  ::close(fd);
}

std::uint64_t randomJournalId() {
  std::uint64_t id = 0;
  while (id == 0) {
    if (RAND_bytes(reinterpret_cast<unsigned char*>(&id), sizeof id) != 1) {
      throw StoreError("no randomness available for the journal id");
    }
  }
  return id;
}

std::optional<std::string> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct Meta {
  std::uint64_t journalId = 0;
  std::size_t pageSize = 0;
};

Meta readMeta(const fs::path& path) {
  auto text = slurp(path);
  if (!text) throw StoreError("cannot read " + path.string());
  Meta meta;
  std::istringstream in(*text);
  std::string line;
  while (std::getline(in, line)) {
    auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 2);
    try {
      if (key == "journal-id") meta.journalId = std::stoull(value);
      if (key == "page-size") meta.pageSize = std::stoull(value);
    } catch (const std::exception&) {
      throw StoreError("malformed " + key + " in " + path.string());
    }
  }
  if (meta.journalId == 0 || meta.pageSize == 0) {
    throw StoreError("incomplete store metadata in " + path.string());
  }
  return meta;
}

}  // namespace

std::string canonicalBytes(const Nanopub& np) {
  std::vector<std::string> lines;
  lines.reserve(np.quads().size());
  for (const Quad& q : np.quads()) {
    std::string line;
    appendStatement(line, q);
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& line : lines) out += line;
  return out;
}

Nanopub parseNanopubBytes(std::string_view bytes) {
  return assembleNanopub(parseQuads(bytes, Format::kLineQuads));
}

std::string renderPackage(std::span<const StoreEntry> entries) {
  std::string out;
  for (const auto& entry : entries) {
    out += "# ";
    out += entry.code.str();
    out.push_back('\n');
    out += entry.bytes;
  }
  return out;
}

std::vector<PackageItem> splitPackage(std::string_view text) {
  std::vector<PackageItem> items;
  std::size_t lineNo = 0;
  while (!text.empty()) {
    ++lineNo;
    std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text.remove_prefix(end == std::string_view::npos ? text.size() : end + 1);
    if (line.starts_with("# ")) {
      items.push_back({std::string(line.substr(2)), {}});
      continue;
    }
    if (items.empty()) throw SyntaxError("package does not start with a code line", lineNo, 1);
    items.back().bytes += line;
    items.back().bytes.push_back('\n');
  }
  return items;
}

Store::Store(fs::path dir, StoreOptions options)
    : dir_(std::move(dir)), options_(options) {}

Store::~Store() {
  if (journalFd_ >= 0) ::close(journalFd_);
  if (lockFd_ >= 0) ::close(lockFd_);  // releases the flock
}

std::unique_ptr<Store> Store::open(const fs::path& dir, const StoreOptions& options) {
  if (options.pageSize == 0) throw StoreError("page size must be positive");
  std::unique_ptr<Store> store(new Store(dir, options));
  fs::create_directories(dir / "np");
  fs::create_directories(dir / "packages");

  store->lockFd_ = ::open((dir / "lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (store->lockFd_ < 0) throwErrno("cannot open lock file in " + dir.string());
  if (::flock(store->lockFd_, LOCK_EX | LOCK_NB) != 0) {
    throw StoreError("store " + dir.string() + " is in use by another process");
  }

  const fs::path metaPath = dir / "meta";
  if (fs::exists(metaPath)) {
    Meta meta = readMeta(metaPath);
    store->journalId_ = meta.journalId;
    store->options_.pageSize = meta.pageSize;
  } else {
    store->journalId_ = randomJournalId();
    replaceFile(metaPath,
                "journal-id: " + std::to_string(store->journalId_) +
                    "\npage-size: " + std::to_string(options.pageSize) + "\n",
                options.sync);
    if (options.sync) syncDirectory(dir);
  }

  const fs::path journalPath = dir / "journal";
  store->journalFd_ =
      ::open(journalPath.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (store->journalFd_ < 0) throwErrno("cannot open " + journalPath.string());
  std::string journal = slurp(journalPath).value_or("");
  if (std::size_t torn = journal.size() % kRecordSize; torn != 0) {
    spdlog::warn("store {}: dropping torn journal tail of {} bytes", dir.string(), torn);
    journal.resize(journal.size() - torn);
    if (::ftruncate(store->journalFd_, static_cast<off_t>(journal.size())) != 0) {
      throwErrno("cannot truncate " + journalPath.string());
    }
  }
  std::size_t count = journal.size() / kRecordSize;
  store->codes_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string_view record(journal.data() + i * kRecordSize, kRecordSize);
    std::string_view code = record.substr(0, kArtifactCodeLength);
    if (record.back() != '\n' || !ArtifactCode::tryParse(code)) {
      throw StoreError("damaged journal record at position " + std::to_string(i + 1));
    }
    if (!store->positions_.emplace(std::string(code), i + 1).second) {
      throw StoreError("duplicate journal record at position " + std::to_string(i + 1));
    }
    store->codes_.emplace_back(code);
  }
  return store;
}

fs::path Store::contentPath(std::string_view code) const {
  return dir_ / "np" / std::string(code.substr(2, 2)) / std::string(code);
}

std::optional<std::string> Store::readContent(std::string_view code) const {
  return slurp(contentPath(code));
}

PutResult Store::put(const Nanopub& np) {
  return putBatch(std::span(&np, 1)).front();
}

std::vector<PutResult> Store::putBatch(std::span<const Nanopub> nps) {
  std::vector<ArtifactCode> codes;
  codes.reserve(nps.size());
  for (const auto& np : nps) codes.push_back(TrustyUri::parse(np.uri()).code);
  auto computed = batch::computeCodes(nps);
  for (std::size_t i = 0; i < nps.size(); ++i) {
    if (computed[i] != codes[i]) {
      throw TrustyError("nanopublication " + nps[i].uri() + " does not verify");
    }
  }
  return putVerified(nps, codes);
}

std::vector<PutResult> Store::putVerified(std::span<const Nanopub> nps,
                                          std::span<const ArtifactCode> codes) {
  std::lock_guard writer(writer_);
  std::vector<PutResult> results(nps.size());
  std::unordered_map<std::string, std::uint64_t> fresh;
  std::vector<std::string> newCodes;
  std::string records;
  std::uint64_t next = codes_.size() + 1;
  for (std::size_t i = 0; i < nps.size(); ++i) {
    const std::string& code = codes[i].str();
    // Only this thread mutates positions_, so reading without state_ is safe.
    if (auto it = positions_.find(code); it != positions_.end()) {
      results[i] = {false, it->second};
      continue;
    }
    if (auto it = fresh.find(code); it != fresh.end()) {
      results[i] = {false, it->second};
      continue;
    }
    fs::path path = contentPath(code);
    fs::create_directories(path.parent_path());
    writeFileDurably(path, canonicalBytes(nps[i]), false);
    results[i] = {true, next};
    fresh.emplace(code, next++);
    newCodes.push_back(code);
    records += code;
    records.push_back('\n');
  }
  if (newCodes.empty()) return results;

  // Content must be durable before the journal names it.
  if (options_.sync && ::syncfs(journalFd_) != 0) throwErrno("syncfs");
  writeAll(journalFd_, records, "cannot append to journal");
  if (options_.sync && ::fdatasync(journalFd_) != 0) throwErrno("fdatasync journal");

  std::unique_lock lock(state_);
  for (auto& code : newCodes) {
    positions_.emplace(code, codes_.size() + 1);
    codes_.push_back(std::move(code));
  }
  return results;
}

std::optional<StoreEntry> Store::get(const ArtifactCode& code) const {
  std::uint64_t position = 0;
  {
    std::shared_lock lock(state_);
    auto it = positions_.find(code.str());
    if (it == positions_.end()) return std::nullopt;
    position = it->second;
  }
  auto bytes = readContent(code.str());
  if (!bytes) throw StoreError("content file missing for " + code.str());
  try {
    if (!verifyAs(parseNanopubBytes(*bytes), code)) {
      throw StoreError("stored content for " + code.str() + " does not verify");
    }
  } catch (const StoreError&) {
    throw;
  } catch (const Error& err) {
    throw StoreError("stored content for " + code.str() + " is damaged: " + err.what());
  }
  return StoreEntry{code, std::move(*bytes), position};
}

bool Store::contains(const ArtifactCode& code) const {
  std::shared_lock lock(state_);
  return positions_.contains(code.str());
}

std::uint64_t Store::lastPage() const {
  std::shared_lock lock(state_);
  std::uint64_t n = codes_.size();
  return std::max<std::uint64_t>(1, (n + options_.pageSize - 1) / options_.pageSize);
}

JournalPage Store::getPage(std::uint64_t pageNumber) const {
  if (pageNumber < 1 || pageNumber > lastPage()) {
    throw NotFoundError("no journal page " + std::to_string(pageNumber));
  }
  JournalPage page;
  page.pageNumber = pageNumber;
  std::shared_lock lock(state_);
  std::size_t from = (pageNumber - 1) * options_.pageSize;
  std::size_t to = std::min(codes_.size(), from + options_.pageSize);
  for (std::size_t i = from; i < to; ++i) page.entries.push_back(ArtifactCode::parse(codes_[i]));
  page.isComplete = page.entries.size() == options_.pageSize;
  return page;
}

std::string Store::getPackage(std::uint64_t pageNumber) const {
  JournalPage page = getPage(pageNumber);
  if (!page.isComplete) {
    throw NotFoundError("journal page " + std::to_string(pageNumber) + " is incomplete");
  }
  const fs::path cached = dir_ / "packages" / (std::to_string(pageNumber) + ".gz");
  if (options_.cachePackages) {
    if (auto bytes = slurp(cached)) return *bytes;
  }
  std::string package = buildPackage(pageNumber);
  if (options_.cachePackages) replaceFile(cached, package, false);
  return package;
}

std::string Store::buildPackage(std::uint64_t pageNumber) const {
  JournalPage page = getPage(pageNumber);
  std::vector<StoreEntry> entries;
  std::vector<Nanopub> nps;
  entries.reserve(page.entries.size());
  nps.reserve(page.entries.size());
  std::uint64_t position = (pageNumber - 1) * options_.pageSize;
  for (const auto& code : page.entries) {
    auto bytes = readContent(code.str());
    if (!bytes) throw StoreError("content file missing for " + code.str());
    nps.push_back(parseNanopubBytes(*bytes));
    entries.push_back(StoreEntry{code, std::move(*bytes), ++position});
  }
  auto ok = batch::verifyAll(nps);
  for (std::size_t i = 0; i < ok.size(); ++i) {
    if (!ok[i] || TrustyUri::parse(nps[i].uri()).code != entries[i].code) {
      throw StoreError("stored content for " + entries[i].code.str() + " does not verify");
    }
  }
  return gzipCompress(renderPackage(entries));
}

StoreInfo Store::info() const {
  std::shared_lock lock(state_);
  return StoreInfo{journalId_, codes_.size(), options_.pageSize};
}

LoadReport Store::loadFromFiles(std::span<const fs::path> paths) {
  LoadReport report;
  for (const auto& path : paths) {
    std::vector<Nanopub> nps;
    try {
      nps = splitDocument(parseQuads(readFile(path), formatForPath(path)));
    } catch (const std::exception& err) {
      report.errors.push_back(path.string() + ": " + err.what());
      continue;
    }
    for (std::size_t from = 0; from < nps.size(); from += kLoadChunk) {
      std::span<const Nanopub> chunk =
          std::span(nps).subspan(from, std::min(kLoadChunk, nps.size() - from));
      auto ok = batch::verifyAll(chunk);
      std::vector<Nanopub> good;
      std::vector<ArtifactCode> codes;
      for (std::size_t i = 0; i < chunk.size(); ++i) {
        if (!ok[i]) {
          report.errors.push_back(path.string() + ": " + chunk[i].uri() +
                                  " does not verify");
          continue;
        }
        good.push_back(chunk[i]);
        codes.push_back(TrustyUri::parse(chunk[i].uri()).code);
      }
      for (const auto& result : putVerified(good, codes)) {
        ++(result.added ? report.added : report.alreadyPresent);
      }
    }
  }
  return report;
}

IntegrityReport Store::checkIntegrity() const {
  std::vector<std::string> codes;
  {
    std::shared_lock lock(state_);
    codes = codes_;
  }
  IntegrityReport report;
  report.entries = codes.size();
  auto journal = slurp(dir_ / "journal").value_or("");
  if (journal.size() < codes.size() * kRecordSize) {
    report.problems.push_back("journal file is shorter than the loaded journal");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const std::string& code = codes[i];
    const std::string where = "position " + std::to_string(i + 1) + " (" + code + ")";
    if (journal.compare(i * kRecordSize, kRecordSize, code + "\n") != 0) {
      report.problems.push_back(where + ": journal record differs on disk");
    }
    if (!seen.insert(code).second) report.problems.push_back(where + ": duplicate");
    auto bytes = readContent(code);
    if (!bytes) {
      report.problems.push_back(where + ": content file missing");
      continue;
    }
    try {
      if (!verifyAs(parseNanopubBytes(*bytes), ArtifactCode::parse(code))) {
        report.problems.push_back(where + ": content does not verify");
      }
    } catch (const Error& err) {
      report.problems.push_back(where + ": " + err.what());
    }
  }
  return report;
}

}  // namespace nanomesh
