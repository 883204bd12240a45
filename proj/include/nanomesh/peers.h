#pragma once

// The set of known peer servers, in insertion order. Thread-safe. When a
// file is given the set is loaded from it and rewritten on every change.

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace nanomesh {

class PeerSet {
 public:
  enum class AddOutcome { kAdded, kDuplicate, kSelf, kInvalid };

  explicit PeerSet(std::string selfUrl,
                   std::optional<std::filesystem::path> file = std::nullopt);

  AddOutcome add(std::string_view url);
  // Adds every valid URL; returns how many were new.
  std::size_t merge(const std::vector<std::string>& urls);
  std::vector<std::string> list() const;
  std::size_t size() const;
  const std::string& selfUrl() const { return self_; }

 private:
  AddOutcome addLocked(std::string_view url);
  void persistLocked() const;

  std::string self_;
  std::optional<std::filesystem::path> file_;
  mutable std::mutex mutex_;
  std::vector<std::string> urls_;
  std::set<std::string> seen_;
};

}  // namespace nanomesh
