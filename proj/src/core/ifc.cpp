#include "camflow/ifc.hpp"

#include <algorithm>

#include "camflow/error.hpp"

namespace camflow {

namespace {

void require_active(const EntityState& e, const char* what) {
  if (!e.active) throw Error(Errc::passive_entity, std::string(what) + " is passive");
}

void require_kind(const Tag& tag, TagKind dimension) {
  if (tag.kind != dimension) {
    throw Error(Errc::kind_mismatch, "tag #" + std::to_string(tag.id) + " is " +
                                         std::string(to_string(tag.kind)) + ", expected " +
                                         std::string(to_string(dimension)));
  }
}

std::string privilege_name(LabelOp op, TagKind kind) {
  std::string s = op == LabelOp::add ? "P+" : "P-";
  s += kind == TagKind::secrecy ? "S" : "I";
  return s;
}

void require_coi(const EntityState& state, std::span<const ConflictSet> conflicts) {
  if (const auto* c = first_coi_violation(state, conflicts)) {
    throw Error(Errc::coi_violation, "conflict '" + c->name + "'");
  }
}

}  // namespace

std::string_view to_string(LabelOp op) noexcept { return op == LabelOp::add ? "add" : "remove"; }

SecurityContext::SecurityContext(Label s, Label i) : secrecy(std::move(s)), integrity(std::move(i)) {
  if (secrecy.kind() != TagKind::secrecy || integrity.kind() != TagKind::integrity) {
    throw Error(Errc::kind_mismatch, "security context label kinds swapped");
  }
}

const TagSet& PrivilegeSets::get(LabelOp op, TagKind kind) const noexcept {
  if (kind == TagKind::secrecy) return op == LabelOp::add ? add_secrecy : remove_secrecy;
  return op == LabelOp::add ? add_integrity : remove_integrity;
}

TagSet& PrivilegeSets::get(LabelOp op, TagKind kind) noexcept {
  if (kind == TagKind::secrecy) return op == LabelOp::add ? add_secrecy : remove_secrecy;
  return op == LabelOp::add ? add_integrity : remove_integrity;
}

ConflictSet::ConflictSet(std::string n, std::vector<Tag> t) : name(std::move(n)), tags(std::move(t)) {
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
}

bool ConflictSet::contains(const Tag& t) const noexcept {
  return std::binary_search(tags.begin(), tags.end(), t);
}

std::string FlowDecision::reason() const {
  if (allowed) return {};
  if (!secrecy_excess.empty() && !integrity_missing.empty()) return "secrecy+integrity";
  return secrecy_excess.empty() ? "integrity" : "secrecy";
}

FlowDecision can_flow(const SecurityContext& source, const SecurityContext& sink) {
  FlowDecision d;
  // S(source) ⊆ S(sink) and I(sink) ⊆ I(source)
  if (!source.secrecy.is_subset_of(sink.secrecy)) {
    d.secrecy_excess = source.secrecy.minus(sink.secrecy);
  }
  if (!sink.integrity.is_subset_of(source.integrity)) {
    d.integrity_missing = sink.integrity.minus(source.integrity);
  }
  d.allowed = d.secrecy_excess.empty() && d.integrity_missing.empty();
  return d;
}

CoiDecision check_coi(const EntityState& e, const ConflictSet& conflict) {
  CoiDecision d;
  const TagSet* sets[] = {&e.context.secrecy,          &e.context.integrity,
                          &e.privileges.add_secrecy,    &e.privileges.add_integrity,
                          &e.privileges.remove_secrecy, &e.privileges.remove_integrity};
  for (const auto& t : conflict.tags) {
    bool touched = std::any_of(std::begin(sets), std::end(sets),
                               [&](const TagSet* s) { return s->contains(t); });
    if (touched) d.overlap.push_back(t);
  }
  d.allowed = d.overlap.size() <= 1;
  return d;
}

const ConflictSet* first_coi_violation(const EntityState& entity,
                                       std::span<const ConflictSet> conflicts) {
  for (const auto& c : conflicts) {
    if (!check_coi(entity, c)) return &c;
  }
  return nullptr;
}

EntityState derive_child_context(const EntityState& parent, bool child_active) {
  require_active(parent, "creator");
  EntityState child;
  child.context = parent.context;
  child.active = child_active;
  return child;
}

EntityState grant_created_tag(const EntityState& creator, const Tag& tag,
                              std::span<const ConflictSet> conflicts) {
  require_active(creator, "creator");
  EntityState next = creator;
  next.privileges.get(LabelOp::add, tag.kind).insert(tag);
  next.privileges.get(LabelOp::remove, tag.kind).insert(tag);
  require_coi(next, conflicts);
  return next;
}

EntityState change_label(const EntityState& entity, const Tag& tag, LabelOp op,
                         TagKind dimension) {
  require_active(entity, "entity");
  require_kind(tag, dimension);
  if (!entity.privileges.get(op, dimension).contains(tag)) {
    throw Error(Errc::missing_privilege,
                "tag #" + std::to_string(tag.id) + " not in " + privilege_name(op, dimension));
  }
  EntityState next = entity;
  if (op == LabelOp::add) {
    next.context.label(dimension).insert(tag);
  } else {
    next.context.label(dimension).erase(tag);
  }
  return next;
}

EntityState delegate_privilege(const EntityState& granter, const EntityState& grantee,
                               const Tag& tag, LabelOp op, TagKind dimension,
                               std::span<const ConflictSet> conflicts) {
  require_active(granter, "granter");
  require_active(grantee, "grantee");
  require_kind(tag, dimension);
  if (!granter.privileges.get(op, dimension).contains(tag)) {
    throw Error(Errc::not_owned, "granter lacks " + privilege_name(op, dimension) + " over #" +
                                     std::to_string(tag.id));
  }
  EntityState next = grantee;
  next.privileges.get(op, dimension).insert(tag);
  require_coi(next, conflicts);
  return next;
}

}  // namespace camflow
