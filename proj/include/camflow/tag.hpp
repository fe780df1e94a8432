#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace camflow {

enum class TagKind : std::uint8_t { secrecy, integrity };

std::string_view to_string(TagKind kind) noexcept;

/// Opaque 64-bit token naming one secrecy or integrity concern. Identity is
/// the id alone; the kind never changes after allocation. Display names are
/// held by the NamingAuthority that issued the tag.
struct Tag {
  std::uint64_t id = 0;
  TagKind kind = TagKind::secrecy;

  friend bool operator==(const Tag& a, const Tag& b) noexcept { return a.id == b.id; }
  friend std::strong_ordering operator<=>(const Tag& a, const Tag& b) noexcept {
    return a.id <=> b.id;
  }
};

/// A finite set of tags of a single kind, kept as a sorted flat vector.
/// Used both for labels (S, I) and for the four privilege sets.
class TagSet {
 public:
  explicit TagSet(TagKind kind = TagKind::secrecy) : kind_(kind) {}
  TagSet(TagKind kind, std::initializer_list<Tag> tags);
  TagSet(TagKind kind, std::span<const Tag> tags);

  TagKind kind() const noexcept { return kind_; }
  bool empty() const noexcept { return tags_.empty(); }
  std::size_t size() const noexcept { return tags_.size(); }
  auto begin() const noexcept { return tags_.begin(); }
  auto end() const noexcept { return tags_.end(); }
  const std::vector<Tag>& tags() const noexcept { return tags_; }

  bool contains(const Tag& t) const noexcept {
    return std::binary_search(tags_.begin(), tags_.end(), t);
  }

  /// Throws Error{kind_mismatch} if `t` has a different kind.
  void insert(const Tag& t);
  void erase(const Tag& t) noexcept;

  bool is_subset_of(const TagSet& other) const noexcept {
    return std::includes(other.tags_.begin(), other.tags_.end(), tags_.begin(), tags_.end());
  }

  /// Tags of *this that are absent from `other`.
  std::vector<Tag> minus(const TagSet& other) const;

  friend bool operator==(const TagSet& a, const TagSet& b) noexcept {
    return a.kind_ == b.kind_ && a.tags_ == b.tags_;
  }

 private:
  TagKind kind_;
  std::vector<Tag> tags_;
};

using Label = TagSet;

}  // namespace camflow
