#include "camflow/sim/kernel.hpp"

#include "camflow/error.hpp"

namespace camflow::sim {

using audit::EventKind;

namespace {

std::string tag_ids(const Label& l) {
  if (l.empty()) return "-";
  std::string s;
  for (const auto& t : l) {
    if (!s.empty()) s += ',';
    s += std::to_string(t.id);
  }
  return s;
}

std::string tag_ids(const std::vector<Tag>& tags) {
  std::string s;
  for (const auto& t : tags) {
    if (!s.empty()) s += ',';
    s += std::to_string(t.id);
  }
  return s;
}

}  // namespace

std::string context_metadata(const SecurityContext& ctx) {
  return "S=" + tag_ids(ctx.secrecy) + ";I=" + tag_ids(ctx.integrity);
}

std::string_view to_string(EntityClass cls) noexcept {
  switch (cls) {
    case EntityClass::process: return "process";
    case EntityClass::file: return "file";
    case EntityClass::pipe: return "pipe";
    case EntityClass::store_record: return "store-record";
  }
  return "unknown";
}

EntityClass parse_entity_class(std::string_view text) {
  if (text == "process") return EntityClass::process;
  if (text == "file") return EntityClass::file;
  if (text == "pipe") return EntityClass::pipe;
  if (text == "store" || text == "store-record") return EntityClass::store_record;
  throw Error(Errc::invalid_argument, "unknown entity class '" + std::string(text) + "'");
}

Kernel::Kernel(NamingAuthority& authority, audit::AuditLog& log)
    : authority_(authority), log_(log) {}

void Kernel::add_machine(const std::string& name) {
  if (name.empty() || name.find_first_of(":\t\n") != std::string::npos) {
    throw Error(Errc::invalid_argument, "bad machine name '" + name + "'");
  }
  std::unique_lock lock(machines_mu_);
  if (machines_.contains(name)) throw Error(Errc::duplicate_name, "machine '" + name + "'");
  machines_.emplace(name, std::make_unique<Machine>());
}

bool Kernel::has_machine(const std::string& name) const {
  std::shared_lock lock(machines_mu_);
  return machines_.contains(name);
}

std::vector<std::string> Kernel::machines() const {
  std::shared_lock lock(machines_mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : machines_) out.push_back(name);
  return out;
}

Kernel::Machine& Kernel::machine(const std::string& name) const {
  std::shared_lock lock(machines_mu_);
  auto it = machines_.find(name);
  if (it == machines_.end()) throw Error(Errc::unknown_machine, "machine '" + name + "'");
  return *it->second;
}

SimEntity& Kernel::lookup(Machine& m, const EntityId& id) {
  auto it = m.entities.find(id.local);
  if (it == m.entities.end()) throw Error(Errc::unknown_entity, to_string(id));
  return it->second;
}

SimEntity& Kernel::process_in(Machine& m, const EntityId& id, const char* role) {
  SimEntity& e = lookup(m, id);
  if (e.cls != EntityClass::process) {
    throw Error(Errc::passive_entity, std::string(role) + " " + to_string(id) + " is not a process");
  }
  return e;
}

SimEntity& Kernel::object_in(Machine& m, const EntityId& id) {
  SimEntity& e = lookup(m, id);
  if (e.cls == EntityClass::process) {
    throw Error(Errc::invalid_argument, to_string(id) + " is a process, not an object");
  }
  return e;
}

Kernel::Machine& Kernel::same_machine(const EntityId& a, const EntityId& b) const {
  if (a.machine != b.machine) {
    throw Error(Errc::cross_machine,
                to_string(a) + " and " + to_string(b) + " are on different machines");
  }
  return machine(a.machine);
}

FlowDecision Kernel::check_flow(const SecurityContext& source, const SecurityContext& sink) noexcept {
  flow_checks_.fetch_add(1, std::memory_order_relaxed);
  return can_flow(source, sink);
}

void Kernel::count_transfer(std::size_t bytes) noexcept {
  transfers_.fetch_add(1, std::memory_order_relaxed);
  bytes_moved_.fetch_add(bytes, std::memory_order_relaxed);
}

EventId Kernel::emit(EventKind kind, const SimEntity& source, const SecurityContext& source_ctx,
                     const SimEntity& target, const SecurityContext& target_ctx,
                     const Decision& decision, bool via_trusted, std::string op,
                     audit::Metadata extra) {
  audit::AuditEvent e;
  e.kind = kind;
  e.allowed = decision.allowed;
  e.reason = decision.reason;
  e.source = {source.id, source_ctx};
  e.target = {target.id, target_ctx};
  e.via_trusted = via_trusted;
  e.metadata.emplace_back("op", std::move(op));
  e.metadata.emplace_back("machine", target.id.machine);
  if (!source.name.empty()) e.metadata.emplace_back("src_name", source.name);
  if (!target.name.empty()) e.metadata.emplace_back("dst_name", target.name);
  if (!source.role.empty()) e.metadata.emplace_back("src_role", source.role);
  if (!target.role.empty()) e.metadata.emplace_back("dst_role", target.role);
  if (!decision.offending.empty()) e.metadata.emplace_back("offending", tag_ids(decision.offending));
  if (!decision.detail.empty()) e.metadata.emplace_back("detail", decision.detail);
  for (auto& kv : extra) e.metadata.push_back(std::move(kv));
  return log_.record(std::move(e));
}

EntityId Kernel::insert(const std::string& machine_name, SimEntity entity) {
  Machine& m = machine(machine_name);
  std::lock_guard lock(m.mu);
  entity.id = EntityId{machine_name, m.next_local++};
  EntityId id = entity.id;
  m.entities.emplace(id.local, std::move(entity));
  return id;
}

EntityId Kernel::boot_process(const std::string& machine_name, BootSpec spec) {
  SimEntity e;
  e.name = std::move(spec.name);
  e.role = std::move(spec.role);
  e.state = EntityState{std::move(spec.context), std::move(spec.privileges), true};
  e.cls = EntityClass::process;
  e.trusted = spec.trusted;
  e.payload = std::move(spec.payload);
  auto conflicts = authority_.conflicts();
  if (const auto* c = first_coi_violation(e.state, conflicts)) {
    throw Error(Errc::coi_violation, "boot process '" + e.name + "' breaks conflict '" + c->name + "'");
  }
  return insert(machine_name, std::move(e));
}

EntityId Kernel::boot_object(const std::string& machine_name, EntityClass cls, BootSpec spec) {
  if (cls == EntityClass::process) {
    throw Error(Errc::invalid_argument, "boot_object needs a passive class");
  }
  if (!spec.privileges.empty() || spec.trusted) {
    throw Error(Errc::passive_entity, "passive object '" + spec.name + "' cannot hold privileges");
  }
  SimEntity e;
  e.name = std::move(spec.name);
  e.role = std::move(spec.role);
  e.state = EntityState{std::move(spec.context), {}, false};
  e.cls = cls;
  e.payload = std::move(spec.payload);
  return insert(machine_name, std::move(e));
}

EntityId Kernel::spawn(const EntityId& parent_id, bool trusted_request, std::string name) {
  Machine& m = machine(parent_id.machine);
  std::lock_guard lock(m.mu);
  SimEntity& parent = process_in(m, parent_id, "parent");
  if (trusted_request && !parent.trusted) {
    throw Error(Errc::untrusted_actor, "untrusted " + to_string(parent_id) +
                                           " cannot create a trusted process");
  }
  SimEntity child;
  child.id = EntityId{parent_id.machine, m.next_local++};
  child.name = std::move(name);
  child.state = derive_child_context(parent.state, true);
  child.cls = EntityClass::process;
  child.trusted = trusted_request;
  child.parent = parent_id;
  // clone: the child starts with a copy of the parent's memory
  auto flow = check_flow(parent.state.context, child.state.context);
  child.payload = parent.payload;
  count_transfer(child.payload.size());
  EntityId id = child.id;
  auto [it, _] = m.entities.emplace(id.local, std::move(child));
  emit(EventKind::creation_flow, parent, parent.state.context, it->second,
       it->second.state.context, Decision::from_flow(flow), false, "spawn",
       {{"class", "process"}});
  return id;
}

EntityId Kernel::create_object(const EntityId& creator_id, EntityClass cls, std::string name) {
  if (cls == EntityClass::process) {
    throw Error(Errc::invalid_argument, "create_object needs a passive class; use spawn");
  }
  Machine& m = machine(creator_id.machine);
  std::lock_guard lock(m.mu);
  SimEntity& creator = process_in(m, creator_id, "creator");
  SimEntity obj;
  obj.id = EntityId{creator_id.machine, m.next_local++};
  obj.name = std::move(name);
  obj.state = derive_child_context(creator.state, false);
  obj.cls = cls;
  obj.parent = creator_id;
  EntityId id = obj.id;
  auto [it, _] = m.entities.emplace(id.local, std::move(obj));
  emit(EventKind::creation_flow, creator, creator.state.context, it->second,
       it->second.state.context, Decision::allow(), false, "create",
       {{"class", std::string(to_string(cls))}});
  return id;
}

Decision Kernel::write(const EntityId& writer_id, const EntityId& object_id,
                       std::string_view bytes) {
  Machine& m = same_machine(writer_id, object_id);
  std::lock_guard lock(m.mu);
  SimEntity& writer = process_in(m, writer_id, "writer");
  SimEntity& object = object_in(m, object_id);
  auto decision = Decision::from_flow(check_flow(writer.state.context, object.state.context));
  if (decision) {
    object.payload.append(bytes);
    count_transfer(bytes.size());
  }
  emit(EventKind::data_flow, writer, writer.state.context, object, object.state.context, decision,
       false, "write", {{"bytes", std::to_string(bytes.size())}});
  return decision;
}

Decision Kernel::write_memory(const EntityId& writer_id, const EntityId& object_id) {
  std::string memory = payload(writer_id);
  return write(writer_id, object_id, memory);
}

ReadResult Kernel::read(const EntityId& reader_id, const EntityId& object_id) {
  Machine& m = same_machine(reader_id, object_id);
  std::lock_guard lock(m.mu);
  SimEntity& reader = process_in(m, reader_id, "reader");
  SimEntity& object = object_in(m, object_id);
  ReadResult r;
  r.decision = Decision::from_flow(check_flow(object.state.context, reader.state.context));
  if (r.decision) {
    r.bytes = object.payload;
    reader.payload += object.payload;
    if (object.cls == EntityClass::pipe) object.payload.clear();
    count_transfer(r.bytes.size());
  }
  emit(EventKind::data_flow, object, object.state.context, reader, reader.state.context,
       r.decision, false, "read", {{"bytes", std::to_string(r.bytes.size())}});
  return r;
}

Decision Kernel::change_label(const EntityId& id, const Tag& tag, LabelOp op, TagKind dimension) {
  Machine& m = machine(id.machine);
  std::lock_guard lock(m.mu);
  SimEntity& e = lookup(m, id);
  if (e.cls != EntityClass::process) {
    throw Error(Errc::passive_entity, "labels of " + to_string(id) + " are immutable");
  }
  SecurityContext before = e.state.context;
  Decision decision;
  try {
    e.state = camflow::change_label(e.state, tag, op, dimension);
  } catch (const Error& err) {
    if (err.code() != Errc::missing_privilege) throw;
    decision = Decision::deny("missing-privilege", {tag});
  }
  emit(EventKind::context_change, e, before, e, e.state.context, decision, false, "change-label",
       {{"label_op", std::string(to_string(op))},
        {"dimension", std::string(to_string(dimension))},
        {"tag", std::to_string(tag.id)}});
  return decision;
}

Decision Kernel::delegate(const EntityId& granter_id, const EntityId& grantee_id, const Tag& tag,
                          LabelOp op, TagKind dimension) {
  Machine& m = same_machine(granter_id, grantee_id);
  std::lock_guard lock(m.mu);
  SimEntity& granter = process_in(m, granter_id, "granter");
  SimEntity& grantee = process_in(m, grantee_id, "grantee");
  Decision decision;
  try {
    grantee.state = delegate_privilege(granter.state, grantee.state, tag, op, dimension,
                                       authority_.conflicts());
  } catch (const Error& err) {
    if (err.code() == Errc::not_owned) {
      decision = Decision::deny("not-owned", {tag});
    } else if (err.code() == Errc::coi_violation) {
      decision = Decision::deny("coi-violation", {tag}, err.what());
    } else {
      throw;
    }
  }
  emit(EventKind::privilege_delegation, granter, granter.state.context, grantee,
       grantee.state.context, decision, false, "delegate",
       {{"privilege", std::string(op == LabelOp::add ? "+" : "-") +
                          (dimension == TagKind::secrecy ? "S" : "I")},
        {"tag", std::to_string(tag.id)}});
  return decision;
}

TagResult Kernel::create_tag(const EntityId& id, TagKind kind, std::string_view name) {
  Machine& m = machine(id.machine);
  std::lock_guard lock(m.mu);
  SimEntity& e = process_in(m, id, "creator");
  TagResult result;
  try {
    auto [tag, next] = authority_.create_tag(e.state, kind, name);
    e.state = std::move(next);
    result.tag = tag;
  } catch (const Error& err) {
    if (err.code() != Errc::coi_violation) throw;
    result.decision = Decision::deny("coi-violation", {}, err.what());
  }
  audit::Metadata extra{{"kind", std::string(to_string(kind))}};
  if (result.tag) extra.emplace_back("tag", std::to_string(result.tag->id));
  if (!name.empty()) extra.emplace_back("tag_name", std::string(name));
  emit(EventKind::privilege_delegation, e, e.state.context, e, e.state.context, result.decision,
       false, "create-tag", std::move(extra));
  return result;
}

Checkpoint Kernel::checkpoint(const EntityId& id) const {
  Machine& m = machine(id.machine);
  std::lock_guard lock(m.mu);
  SimEntity& e = process_in(m, id, "checkpointed entity");
  return Checkpoint{id, e.state.context, e.state.privileges, e.payload, log_.last_id()};
}

Decision Kernel::restore(const EntityId& id, const Checkpoint& cp) {
  if (cp.entity != id) {
    throw Error(Errc::checkpoint_mismatch,
                "checkpoint of " + to_string(cp.entity) + " applied to " + to_string(id));
  }
  Machine& m = machine(id.machine);
  std::lock_guard lock(m.mu);
  SimEntity& e = process_in(m, id, "restored entity");
  SecurityContext before = e.state.context;
  e.state.context = cp.context;
  e.state.privileges = cp.privileges;
  e.payload = cp.payload;
  // The restored state descends from the checkpoint, not from the state it
  // replaces, so the edge is anchored on the checkpoint's context.
  emit(EventKind::context_change, e, cp.context, e, e.state.context, Decision::allow(), false,
       "restore",
       {{"old_context", context_metadata(before)},
        {"new_context", context_metadata(cp.context)},
        {"checkpoint_at", std::to_string(cp.taken_at)}});
  return Decision::allow();
}

Decision Kernel::trusted_set_context(const EntityId& actor_id, const EntityId& target_id,
                                     const SecurityContext& ctx, const PrivilegeSets& privileges) {
  Machine& m = same_machine(actor_id, target_id);
  std::lock_guard lock(m.mu);
  SimEntity& actor = process_in(m, actor_id, "actor");
  if (!actor.trusted) {
    throw Error(Errc::untrusted_actor, to_string(actor_id) + " is not a trusted process");
  }
  SimEntity& target = process_in(m, target_id, "target");
  EntityState next{ctx, privileges, true};
  Decision decision;
  const auto conflicts = authority_.conflicts();
  if (const auto* c = first_coi_violation(next, conflicts)) {
    decision = Decision::deny("coi-violation", check_coi(next, *c).overlap,
                              "conflict '" + c->name + "'");
  }
  SecurityContext before = target.state.context;
  if (decision) target.state = next;
  audit::Metadata extra{{"actor", to_string(actor_id)},
                        {"old_context", context_metadata(before)},
                        {"new_context", context_metadata(ctx)}};
  emit(EventKind::context_change, target, before, target, target.state.context, decision, true,
       "set-context", extra);
  emit(EventKind::privilege_delegation, actor, actor.state.context, target, target.state.context,
       decision, true, "set-privileges", {{"actor", to_string(actor_id)}});
  return decision;
}

Decision Kernel::direct_connect(const EntityId& a, const EntityId& b) {
  SimEntity ea = entity(a);
  SimEntity eb = entity(b);
  if (ea.cls != EntityClass::process || eb.cls != EntityClass::process) {
    throw Error(Errc::passive_entity, "direct links join processes");
  }
  Decision decision;
  std::vector<Tag> offending;
  for (const auto* e : {&ea, &eb}) {
    for (const auto& t : e->state.context.secrecy) offending.push_back(t);
    for (const auto& t : e->state.context.integrity) offending.push_back(t);
  }
  if (!offending.empty()) {
    decision = Decision::deny("labelled-endpoint", std::move(offending),
                              "only processes with empty labels may link directly");
  }
  if (decision) {
    std::lock_guard lock(links_mu_);
    direct_links_.emplace(a, b);
    direct_links_.emplace(b, a);
  }
  emit(EventKind::data_flow, ea, ea.state.context, eb, eb.state.context, decision, false,
       "direct-connect");
  return decision;
}

Decision Kernel::direct_send(const EntityId& from, const EntityId& to, std::string_view bytes) {
  {
    std::lock_guard lock(links_mu_);
    if (!direct_links_.contains({from, to})) {
      throw Error(Errc::not_established, "no direct link " + to_string(from) + " -> " + to_string(to));
    }
  }
  Machine& ma = machine(from.machine);
  Machine& mb = machine(to.machine);
  std::unique_lock<std::mutex> la(ma.mu, std::defer_lock);
  std::unique_lock<std::mutex> lb(mb.mu, std::defer_lock);
  if (&ma == &mb) {
    la.lock();
  } else {
    std::lock(la, lb);
  }
  SimEntity& src = process_in(ma, from, "sender");
  SimEntity& dst = process_in(mb, to, "receiver");
  Decision decision = Decision::from_flow(check_flow(src.state.context, dst.state.context));
  if (decision && !(src.state.context.unlabelled() && dst.state.context.unlabelled())) {
    decision = Decision::deny("labelled-endpoint", {}, "endpoint gained labels after linking");
  }
  if (decision) {
    dst.payload.append(bytes);
    count_transfer(bytes.size());
  }
  emit(EventKind::data_flow, src, src.state.context, dst, dst.state.context, decision, false,
       "direct-send", {{"bytes", std::to_string(bytes.size())}});
  return decision;
}

void Kernel::append_memory(const EntityId& id, std::string_view bytes) {
  Machine& m = machine(id.machine);
  std::lock_guard lock(m.mu);
  process_in(m, id, "process").payload.append(bytes);
}

EventId Kernel::record_flow(EventKind kind, const EntityId& source_id,
                            const SecurityContext& source_ctx, const EntityId& target_id,
                            const Decision& decision, std::string op, audit::Metadata extra) {
  SimEntity source = entity(source_id);
  SimEntity target = entity(target_id);
  return emit(kind, source, source_ctx, target, target.state.context, decision, false,
              std::move(op), std::move(extra));
}

SimEntity Kernel::entity(const EntityId& id) const {
  Machine& m = machine(id.machine);
  std::lock_guard lock(m.mu);
  return lookup(m, id);
}

bool Kernel::exists(const EntityId& id) const {
  std::shared_lock lock(machines_mu_);
  auto it = machines_.find(id.machine);
  if (it == machines_.end()) return false;
  std::lock_guard mlock(it->second->mu);
  return it->second->entities.contains(id.local);
}

SecurityContext Kernel::context(const EntityId& id) const { return entity(id).state.context; }

std::string Kernel::payload(const EntityId& id) const { return entity(id).payload; }

std::vector<EntityId> Kernel::entities() const {
  std::shared_lock lock(machines_mu_);
  std::vector<EntityId> out;
  for (const auto& [name, m] : machines_) {
    std::lock_guard mlock(m->mu);
    for (const auto& [local, _] : m->entities) out.push_back(EntityId{name, local});
  }
  return out;
}

MonitorStats Kernel::stats() const noexcept {
  return MonitorStats{flow_checks_.load(), transfers_.load(), bytes_moved_.load()};
}

}  // namespace camflow::sim
