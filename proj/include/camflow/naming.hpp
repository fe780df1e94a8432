#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "camflow/ifc.hpp"

namespace camflow {

struct TagInfo {
  Tag tag;
  std::string name;
  bool claimed = false;  // privileges were granted through create_tag
};

/// Single in-process naming authority: allocates tag ids from a monotone
/// counter and holds the globally registered conflict sets.
class NamingAuthority {
 public:
  explicit NamingAuthority(std::string id = "local-authority") : id_(std::move(id)) {}

  NamingAuthority(const NamingAuthority&) = delete;
  NamingAuthority& operator=(const NamingAuthority&) = delete;

  const std::string& id() const noexcept { return id_; }

  /// Reserves a named tag at setup time without granting privileges to
  /// anyone. Throws duplicate_name if the name is taken.
  Tag declare(TagKind kind, std::string name);

  /// Creation by an active entity. If `name` refers to a declared tag that
  /// nobody has claimed yet, that tag is claimed; otherwise a fresh tag is
  /// allocated. The creator gains P+ and P- for the tag's kind, subject to
  /// every registered conflict set.
  std::pair<Tag, EntityState> create_tag(const EntityState& creator, TagKind kind,
                                         std::string_view name = {});

  /// Throws unknown_tag if any member is not issued by this authority.
  void register_conflict(ConflictSet conflict);

  std::vector<ConflictSet> conflicts() const;
  std::optional<Tag> find(std::string_view name) const;
  std::optional<TagInfo> info(std::uint64_t id) const;
  bool issued(const Tag& t) const;
  std::string name_of(const Tag& t) const;  // falls back to "#<id>"
  std::vector<TagInfo> all_tags() const;    // sorted by id

 private:
  Tag allocate_locked(TagKind kind, std::string name);

  std::string id_;
  mutable std::mutex mu_;
  std::uint64_t next_id_ = 1;
  std::vector<TagInfo> tags_;  // index = id - 1
  std::unordered_map<std::string, std::uint64_t> by_name_;
  std::vector<ConflictSet> conflicts_;
};

}  // namespace camflow
