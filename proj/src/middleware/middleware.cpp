#include "camflow/mw/middleware.hpp"

#include <algorithm>

#include "camflow/error.hpp"

namespace camflow::mw {

namespace {

std::vector<Tag> sorted_tags(std::vector<Tag> tags) {
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  return tags;
}

std::vector<Tag> actual_tags(const SecurityContext& ctx) {
  std::vector<Tag> tags(ctx.secrecy.begin(), ctx.secrecy.end());
  tags.insert(tags.end(), ctx.integrity.begin(), ctx.integrity.end());
  return sorted_tags(std::move(tags));
}

std::vector<Tag> symmetric_difference(const std::vector<Tag>& a, const std::vector<Tag>& b) {
  std::vector<Tag> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Middleware::Middleware(sim::Kernel& kernel) : kernel_(kernel) {}

void Middleware::define_schema(MessageSchema schema) {
  // Re-run the constructor checks on aggregates built field by field.
  MessageSchema checked(schema.name, schema.attributes);
  std::lock_guard lock(mu_);
  if (schemas_.contains(checked.name)) {
    throw Error(Errc::duplicate_name, "schema '" + checked.name + "'");
  }
  schemas_.emplace(checked.name, std::move(checked));
}

const MessageSchema& Middleware::schema(const std::string& name) const {
  std::lock_guard lock(mu_);
  auto it = schemas_.find(name);
  if (it == schemas_.end()) throw Error(Errc::schema_violation, "unknown schema '" + name + "'");
  return it->second;
}

bool Middleware::has_schema(const std::string& name) const {
  std::lock_guard lock(mu_);
  return schemas_.contains(name);
}

void Middleware::register_endpoint(const EntityId& entity, const EntityId& proxy,
                                   TagAssertion assertion, AccessPolicy policy) {
  auto e = kernel_.entity(entity);
  if (e.cls != sim::EntityClass::process) {
    throw Error(Errc::passive_entity, to_string(entity) + " cannot be a messaging endpoint");
  }
  auto p = kernel_.entity(proxy);
  if (proxy.machine != entity.machine) {
    throw Error(Errc::cross_machine, "proxy " + to_string(proxy) + " serves another machine");
  }
  if (p.cls != sim::EntityClass::process || !p.trusted) {
    throw Error(Errc::untrusted_actor, "proxy " + to_string(proxy) + " is not a trusted process");
  }
  if (assertion.entity != entity) {
    throw Error(Errc::invalid_argument, "assertion names " + to_string(assertion.entity));
  }
  for (const auto& t : assertion.tags) {
    if (!kernel_.authority().issued(t)) {
      throw Error(Errc::unknown_tag, "asserted tag #" + std::to_string(t.id) + " was never issued");
    }
  }
  if (assertion.issuer.empty()) assertion.issuer = kernel_.authority().id();
  assertion.tags = sorted_tags(std::move(assertion.tags));
  std::lock_guard lock(mu_);
  endpoints_.insert_or_assign(entity, Registration{proxy, std::move(assertion), std::move(policy)});
}

bool Middleware::registered(const EntityId& entity) const {
  std::lock_guard lock(mu_);
  return endpoints_.contains(entity);
}

Decision Middleware::assertion_matches(const EntityId& entity, const Registration& reg) const {
  auto diff = symmetric_difference(reg.assertion.tags, actual_tags(kernel_.context(entity)));
  if (diff.empty()) return Decision::allow();
  return Decision::deny("assertion-mismatch", std::move(diff),
                        "claimed tags of " + to_string(entity) + " differ from its context");
}

Connection Middleware::connect(const EntityId& a, const EntityId& b, bool bidirectional) {
  Registration ra, rb;
  {
    std::lock_guard lock(mu_);
    auto ia = endpoints_.find(a);
    auto ib = endpoints_.find(b);
    if (ia == endpoints_.end()) throw Error(Errc::unknown_endpoint, to_string(a));
    if (ib == endpoints_.end()) throw Error(Errc::unknown_endpoint, to_string(b));
    ra = ia->second;
    rb = ib->second;
  }
  SecurityContext ca = kernel_.context(a);
  SecurityContext cb = kernel_.context(b);

  Decision decision = assertion_matches(a, ra);
  if (decision) decision = assertion_matches(b, rb);
  if (decision && ra.policy && !ra.policy(a, b, cb)) {
    decision = Decision::deny("access-policy", {}, to_string(a) + " refuses " + to_string(b));
  }
  if (decision && rb.policy && !rb.policy(b, a, ca)) {
    decision = Decision::deny("access-policy", {}, to_string(b) + " refuses " + to_string(a));
  }
  if (decision) {
    kernel_.note_flow_check();
    decision = Decision::from_flow(can_flow(ca, cb));
  }
  if (decision && bidirectional) {
    kernel_.note_flow_check();
    decision = Decision::from_flow(can_flow(cb, ca));
  }

  auto channel = std::make_unique<Channel>();
  Connection& info = channel->info;
  info.a = a;
  info.b = b;
  info.bidirectional = bidirectional;
  info.decision = decision;
  info.status = decision ? ConnectionStatus::established : ConnectionStatus::refused;
  {
    std::lock_guard lock(mu_);
    info.id = next_connection_++;
  }
  info.established_at = kernel_.record_flow(
      audit::EventKind::data_flow, a, ca, b, decision, "connect",
      {{"conn", std::to_string(info.id)}, {"mode", bidirectional ? "both" : "one-way"}});
  Connection result = info;
  std::lock_guard lock(mu_);
  channels_.emplace(result.id, std::move(channel));
  return result;
}

Middleware::Channel& Middleware::channel(ConnectionId id) const {
  std::lock_guard lock(mu_);
  auto it = channels_.find(id);
  if (it == channels_.end()) {
    throw Error(Errc::not_established, "no connection " + std::to_string(id));
  }
  return *it->second;
}

Connection Middleware::connection(ConnectionId id) const { return channel(id).info; }

SendResult Middleware::send(const EntityId& sender, ConnectionId conn, const Message& msg) {
  Channel& ch = channel(conn);
  const Connection& info = ch.info;
  if (info.status != ConnectionStatus::established) {
    throw Error(Errc::not_established, "connection " + std::to_string(conn) + " was refused");
  }
  bool from_a = sender == info.a;
  if (!from_a && !(sender == info.b && info.bidirectional)) {
    throw Error(Errc::not_endpoint,
                to_string(sender) + " may not send on connection " + std::to_string(conn));
  }
  const EntityId& receiver = from_a ? info.b : info.a;
  Message conformed = conform(schema(msg.schema), msg);

  SecurityContext sctx = kernel_.context(sender);
  SecurityContext rctx = kernel_.context(receiver);

  SendResult result;
  {
    std::lock_guard lock(mu_);
    result.message_id = next_message_++;
  }
  const std::string msg_id = std::to_string(result.message_id);
  const std::string conn_id = std::to_string(conn);

  kernel_.note_flow_check();
  result.decision = Decision::from_flow(can_flow(sctx, rctx));
  if (!result.decision) {
    kernel_.record_flow(audit::EventKind::data_flow, sender, sctx, receiver, result.decision, "send",
                        {{"conn", conn_id}, {"msg", msg_id}});
    return result;
  }

  auto outcome = strip_attributes(conformed, sctx, StripSide::send, sctx);
  kernel_.record_flow(audit::EventKind::data_flow, sender, sctx, receiver, result.decision, "send",
                      {{"conn", conn_id},
                       {"msg", msg_id},
                       {"schema", conformed.schema},
                       {"stripped", std::to_string(outcome.stripped.size())}});
  for (const auto& a : conformed.attributes) {
    if (!a.label || !a.value) continue;
    kernel_.note_flow_check();
    Decision d = Decision::from_flow(can_flow(sctx, *a.label));
    if (!d) d.detail = "stripped";
    kernel_.record_flow(audit::EventKind::data_flow, sender, sctx, receiver, d, "send-attribute",
                        {{"conn", conn_id},
                         {"msg", msg_id},
                         {"attr", a.name},
                         {"side", "send"},
                         {"label", sim::context_metadata(*a.label)}});
  }

  result.delivered = outcome.message;
  result.stripped = outcome.stripped;
  {
    std::lock_guard lock(ch.mu);
    (from_a ? ch.to_b : ch.to_a)
        .push_back(InFlight{result.message_id, sender, sctx, std::move(outcome.message)});
  }
  return result;
}

ReceiveResult Middleware::receive(const EntityId& receiver, ConnectionId conn) {
  Channel& ch = channel(conn);
  const Connection& info = ch.info;
  if (!(receiver == info.a || receiver == info.b)) {
    throw Error(Errc::not_endpoint, to_string(receiver) + " is not on connection " +
                                        std::to_string(conn));
  }
  InFlight item;
  {
    std::lock_guard lock(ch.mu);
    auto& queue = receiver == info.a ? ch.to_a : ch.to_b;
    if (queue.empty()) {
      throw Error(Errc::empty_queue, "nothing pending for " + to_string(receiver));
    }
    item = std::move(queue.front());
    queue.pop_front();
  }

  SecurityContext rctx = kernel_.context(receiver);
  for (const auto& a : item.message.attributes) {
    if (a.value) kernel_.note_flow_check();
  }
  auto outcome = strip_attributes(item.message, rctx, StripSide::receive, item.sender_context);
  const std::string msg_id = std::to_string(item.id);
  const std::string conn_id = std::to_string(conn);

  kernel_.record_flow(audit::EventKind::data_flow, item.sender, item.sender_context, receiver,
                      Decision::allow(), "deliver",
                      {{"conn", conn_id},
                       {"msg", msg_id},
                       {"stripped", std::to_string(outcome.stripped.size())}});
  for (const auto& name : outcome.stripped) {
    const Attribute* a = item.message.find(name);
    const SecurityContext& label = a->label ? *a->label : item.sender_context;
    Decision d = Decision::from_flow(can_flow(label, rctx));
    d.detail = "stripped";
    kernel_.record_flow(audit::EventKind::data_flow, item.sender, item.sender_context, receiver, d,
                        "strip",
                        {{"conn", conn_id},
                         {"msg", msg_id},
                         {"attr", name},
                         {"side", "receive"},
                         {"label", sim::context_metadata(label)}});
  }
  for (const auto& a : outcome.message.attributes) {
    if (a.value) kernel_.append_memory(receiver, *a.value);
  }
  return ReceiveResult{item.id, item.sender, std::move(outcome.message), std::move(outcome.stripped)};
}

std::size_t Middleware::pending(const EntityId& receiver, ConnectionId conn) const {
  Channel& ch = channel(conn);
  std::lock_guard lock(ch.mu);
  if (receiver == ch.info.a) return ch.to_a.size();
  if (receiver == ch.info.b) return ch.to_b.size();
  return 0;
}

Message Middleware::label_attribute(const EntityId& producer, Message msg,
                                    const std::string& attribute,
                                    const SecurityContext& label) const {
  auto e = kernel_.entity(producer);
  const MessageSchema& s = schema(msg.schema);
  return set_attribute_label(e.state, s, std::move(msg), attribute, label);
}

}  // namespace camflow::mw
