#include "camflow/naming.hpp"

#include <algorithm>

#include "camflow/error.hpp"

namespace camflow {

Tag NamingAuthority::allocate_locked(TagKind kind, std::string name) {
  Tag t{next_id_++, kind};
  if (!name.empty()) by_name_.emplace(name, t.id);
  tags_.push_back(TagInfo{t, std::move(name), false});
  return t;
}

Tag NamingAuthority::declare(TagKind kind, std::string name) {
  std::lock_guard lock(mu_);
  if (!name.empty() && by_name_.contains(name)) {
    throw Error(Errc::duplicate_name, "tag '" + name + "' already declared");
  }
  return allocate_locked(kind, std::move(name));
}

std::pair<Tag, EntityState> NamingAuthority::create_tag(const EntityState& creator, TagKind kind,
                                                        std::string_view name) {
  std::lock_guard lock(mu_);
  if (!creator.active) throw Error(Errc::passive_entity, "creator is passive");

  std::optional<Tag> claimed;
  if (!name.empty()) {
    if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) {
      TagInfo& info = tags_[it->second - 1];
      if (info.claimed) throw Error(Errc::duplicate_name, "tag '" + info.name + "' already created");
      if (info.tag.kind != kind) throw Error(Errc::kind_mismatch, "tag '" + info.name + "'");
      claimed = info.tag;
    }
  }
  if (claimed) {
    // throws before the claim is recorded
    EntityState next = grant_created_tag(creator, *claimed, conflicts_);
    tags_[claimed->id - 1].claimed = true;
    return {*claimed, std::move(next)};
  }
  Tag fresh{next_id_, kind};
  EntityState next = grant_created_tag(creator, fresh, conflicts_);
  allocate_locked(kind, std::string(name));
  tags_.back().claimed = true;
  return {fresh, std::move(next)};
}

void NamingAuthority::register_conflict(ConflictSet conflict) {
  std::lock_guard lock(mu_);
  for (const auto& t : conflict.tags) {
    if (t.id == 0 || t.id >= next_id_) {
      throw Error(Errc::unknown_tag, "conflict '" + conflict.name + "' names unissued tag #" +
                                         std::to_string(t.id));
    }
  }
  conflicts_.push_back(std::move(conflict));
}

std::vector<ConflictSet> NamingAuthority::conflicts() const {
  std::lock_guard lock(mu_);
  return conflicts_;
}

std::optional<Tag> NamingAuthority::find(std::string_view name) const {
  std::lock_guard lock(mu_);
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return tags_[it->second - 1].tag;
}

std::optional<TagInfo> NamingAuthority::info(std::uint64_t id) const {
  std::lock_guard lock(mu_);
  if (id == 0 || id > tags_.size()) return std::nullopt;
  return tags_[id - 1];
}

bool NamingAuthority::issued(const Tag& t) const {
  std::lock_guard lock(mu_);
  return t.id != 0 && t.id <= tags_.size() && tags_[t.id - 1].tag.kind == t.kind;
}

std::string NamingAuthority::name_of(const Tag& t) const {
  auto i = info(t.id);
  if (i && !i->name.empty()) return i->name;
  return "#" + std::to_string(t.id);
}

std::vector<TagInfo> NamingAuthority::all_tags() const {
  std::lock_guard lock(mu_);
  return tags_;
}

}  // namespace camflow
