#include "camflow/tag.hpp"

#include "camflow/entity_id.hpp"
#include "camflow/error.hpp"

namespace camflow {

std::string_view to_string(TagKind kind) noexcept {
  return kind == TagKind::secrecy ? "secrecy" : "integrity";
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::passive_entity: return "passive-entity";
    case Errc::missing_privilege: return "missing-privilege";
    case Errc::kind_mismatch: return "kind-mismatch";
    case Errc::not_owned: return "not-owned";
    case Errc::coi_violation: return "coi-violation";
    case Errc::unknown_tag: return "unknown-tag";
    case Errc::duplicate_name: return "duplicate-name";
    case Errc::unknown_entity: return "unknown-entity";
    case Errc::unknown_machine: return "unknown-machine";
    case Errc::cross_machine: return "cross-machine";
    case Errc::untrusted_actor: return "untrusted-actor";
    case Errc::checkpoint_mismatch: return "checkpoint-mismatch";
    case Errc::unknown_endpoint: return "unknown-endpoint";
    case Errc::not_endpoint: return "not-endpoint";
    case Errc::not_established: return "not-established";
    case Errc::schema_violation: return "schema-violation";
    case Errc::fixed_label: return "fixed-label";
    case Errc::empty_queue: return "empty-queue";
    case Errc::malformed_record: return "malformed-record";
    case Errc::io_error: return "io-error";
    case Errc::unauthorised: return "unauthorised";
    case Errc::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

TagSet::TagSet(TagKind kind, std::initializer_list<Tag> tags)
    : TagSet(kind, std::span<const Tag>(tags.begin(), tags.size())) {}

TagSet::TagSet(TagKind kind, std::span<const Tag> tags) : kind_(kind) {
  for (const auto& t : tags) insert(t);
}

void TagSet::insert(const Tag& t) {
  if (t.kind != kind_) {
    throw Error(Errc::kind_mismatch, "tag #" + std::to_string(t.id) + " is " +
                                         std::string(to_string(t.kind)) + ", set is " +
                                         std::string(to_string(kind_)));
  }
  auto it = std::lower_bound(tags_.begin(), tags_.end(), t);
  if (it == tags_.end() || *it != t) tags_.insert(it, t);
}

void TagSet::erase(const Tag& t) noexcept {
  auto it = std::lower_bound(tags_.begin(), tags_.end(), t);
  if (it != tags_.end() && *it == t) tags_.erase(it);
}

std::vector<Tag> TagSet::minus(const TagSet& other) const {
  std::vector<Tag> out;
  std::set_difference(tags_.begin(), tags_.end(), other.tags_.begin(), other.tags_.end(),
                      std::back_inserter(out));
  return out;
}

std::string to_string(const EntityId& id) {
  return id.machine + ":" + std::to_string(id.local);
}

EntityId parse_entity_id(const std::string& text) {
  auto pos = text.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == text.size()) {
    throw Error(Errc::malformed_record, "bad entity id '" + text + "'");
  }
  EntityId id;
  id.machine = text.substr(0, pos);
  try {
    std::size_t used = 0;
    id.local = std::stoull(text.substr(pos + 1), &used);
    if (used != text.size() - pos - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(Errc::malformed_record, "bad entity id '" + text + "'");
  }
  return id;
}

}  // namespace camflow
