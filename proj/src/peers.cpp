#include "nanomesh/peers.h"

#include <fstream>
#include <sstream>

#include "nanomesh/wire.h"

namespace nanomesh {

PeerSet::PeerSet(std::string selfUrl, std::optional<std::filesystem::path> file)
    : self_(normalizeServerUrl(selfUrl).value_or(selfUrl)), file_(std::move(file)) {
  if (!file_) return;
  std::ifstream in(*file_);
  if (!in) return;
  std::ostringstream text;
  text << in.rdbuf();
  std::lock_guard lock(mutex_);
  for (const auto& url : parsePeerList(text.str())) addLocked(url);
}

PeerSet::AddOutcome PeerSet::addLocked(std::string_view url) {
  auto normalized = normalizeServerUrl(url);
  if (!normalized) return AddOutcome::kInvalid;
  if (*normalized == self_) return AddOutcome::kSelf;
  if (!seen_.insert(*normalized).second) return AddOutcome::kDuplicate;
  urls_.push_back(*normalized);
  return AddOutcome::kAdded;
}

void PeerSet::persistLocked() const {
  if (!file_) return;
  auto tmp = *file_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << renderUrlList(urls_);
  }
  std::filesystem::rename(tmp, *file_);
}

PeerSet::AddOutcome PeerSet::add(std::string_view url) {
  std::lock_guard lock(mutex_);
  AddOutcome outcome = addLocked(url);
  if (outcome == AddOutcome::kAdded) persistLocked();
  return outcome;
}

std::size_t PeerSet::merge(const std::vector<std::string>& urls) {
  std::lock_guard lock(mutex_);
  std::size_t added = 0;
  for (const auto& url : urls) {
    if (addLocked(url) == AddOutcome::kAdded) ++added;
  }
  if (added > 0) persistLocked();
  return added;
}

std::vector<std::string> PeerSet::list() const {
  std::lock_guard lock(mutex_);
  return urls_;
}

std::size_t PeerSet::size() const {
  std::lock_guard lock(mutex_);
  return urls_.size();
}

}  // namespace nanomesh
