#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "camflow/tag.hpp"

namespace camflow {

/// The security context [S, I] of an entity.
struct SecurityContext {
  Label secrecy{TagKind::secrecy};
  Label integrity{TagKind::integrity};

  SecurityContext() = default;
  SecurityContext(Label s, Label i);

  bool unlabelled() const noexcept { return secrecy.empty() && integrity.empty(); }
  const Label& label(TagKind kind) const noexcept {
    return kind == TagKind::secrecy ? secrecy : integrity;
  }
  Label& label(TagKind kind) noexcept { return kind == TagKind::secrecy ? secrecy : integrity; }

  friend bool operator==(const SecurityContext&, const SecurityContext&) = default;
};

enum class LabelOp : std::uint8_t { add, remove };

std::string_view to_string(LabelOp op) noexcept;

/// P+S, P-S, P+I, P-I.
struct PrivilegeSets {
  TagSet add_secrecy{TagKind::secrecy};
  TagSet remove_secrecy{TagKind::secrecy};
  TagSet add_integrity{TagKind::integrity};
  TagSet remove_integrity{TagKind::integrity};

  bool empty() const noexcept {
    return add_secrecy.empty() && remove_secrecy.empty() && add_integrity.empty() &&
           remove_integrity.empty();
  }
  const TagSet& get(LabelOp op, TagKind kind) const noexcept;
  TagSet& get(LabelOp op, TagKind kind) noexcept;

  friend bool operator==(const PrivilegeSets&, const PrivilegeSets&) = default;
};

/// Tags of which an entity may touch at most one, across its labels and
/// privileges. Fewer than two tags is accepted and vacuously satisfied.
struct ConflictSet {
  std::string name;
  std::vector<Tag> tags;  // sorted, unique; may mix kinds

  ConflictSet() = default;
  ConflictSet(std::string name, std::vector<Tag> tags);

  bool contains(const Tag& t) const noexcept;
};

struct EntityState {
  SecurityContext context;
  PrivilegeSets privileges;
  bool active = true;

  friend bool operator==(const EntityState&, const EntityState&) = default;
};

/// Result of a flow check. On denial, `secrecy_excess` lists tags of S(source)
/// missing from S(sink) and `integrity_missing` lists tags of I(sink) missing
/// from I(source).
struct FlowDecision {
  bool allowed = true;
  std::vector<Tag> secrecy_excess;
  std::vector<Tag> integrity_missing;

  explicit operator bool() const noexcept { return allowed; }
  /// "secrecy", "integrity", "secrecy+integrity" or "" when allowed.
  std::string reason() const;
};

FlowDecision can_flow(const SecurityContext& source, const SecurityContext& sink);

struct CoiDecision {
  bool allowed = true;
  std::vector<Tag> overlap;  // (S ∪ I ∪ P±S ∪ P±I) ∩ C

  explicit operator bool() const noexcept { return allowed; }
};

CoiDecision check_coi(const EntityState& entity, const ConflictSet& conflict);

/// First registered conflict the entity violates, if any.
const ConflictSet* first_coi_violation(const EntityState& entity,
                                       std::span<const ConflictSet> conflicts);

/// The created entity inherits the creator's labels and nothing else.
/// Throws Error{passive_entity} if the creator is passive.
EntityState derive_child_context(const EntityState& parent, bool child_active);

/// Grants the creator add and remove privileges over a freshly allocated tag.
/// Throws passive_entity, or coi_violation if the grant breaks a conflict.
EntityState grant_created_tag(const EntityState& creator, const Tag& tag,
                              std::span<const ConflictSet> conflicts);

/// Explicit label change. Throws passive_entity, kind_mismatch or
/// missing_privilege.
EntityState change_label(const EntityState& entity, const Tag& tag, LabelOp op,
                         TagKind dimension);

/// Copies one privilege from granter to grantee. Throws passive_entity,
/// kind_mismatch, not_owned, or coi_violation naming the conflict.
EntityState delegate_privilege(const EntityState& granter, const EntityState& grantee,
                               const Tag& tag, LabelOp op, TagKind dimension,
                               std::span<const ConflictSet> conflicts);

}  // namespace camflow
