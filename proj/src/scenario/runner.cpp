#include "camflow/scenario/runner.hpp"

#include <sstream>

#include "camflow/error.hpp"

namespace camflow::scenario {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

bool is_assertion(const Statement& st) {
  return std::holds_alternative<ExpectPayloadCmd>(st.body) ||
         std::holds_alternative<ExpectContextCmd>(st.body) ||
         std::holds_alternative<ExpectAttrCmd>(st.body);
}

bool meets(Outcome outcome, Expectation expect) {
  switch (expect) {
    case Expectation::none: return outcome != Outcome::error;
    case Expectation::allow: return outcome == Outcome::allow || outcome == Outcome::ok;
    case Expectation::deny: return outcome == Outcome::deny;
    case Expectation::error: return outcome == Outcome::error;
  }
  return false;
}

std::string_view expectation_text(Expectation e) {
  switch (e) {
    case Expectation::none: return "none";
    case Expectation::allow: return "allow";
    case Expectation::deny: return "deny";
    case Expectation::error: return "error";
  }
  return "none";
}

}  // namespace

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::ok: return "ok";
    case Outcome::allow: return "allow";
    case Outcome::deny: return "deny";
    case Outcome::error: return "error";
  }
  return "ok";
}

std::string format_report(const RunReport& report) {
  std::ostringstream out;
  for (const auto& r : report.results) {
    out << "[" << r.index << "] line " << r.loc.line << ": " << r.statement << " -> "
        << to_string(r.outcome);
    if (!r.detail.empty()) out << " (" << r.detail << ")";
    if (!r.met) out << "  <-- expected " << expectation_text(r.expect);
    out << "\n";
  }
  if (report.passed()) {
    out << "PASS: " << report.results.size() << " statements\n";
  } else {
    out << "FAIL at statement " << *report.failed_index << ": " << report.failure << "\n";
  }
  return out.str();
}

Runner::Runner()
    : authority_(std::make_unique<NamingAuthority>()),
      log_(std::make_unique<audit::AuditLog>()),
      kernel_(std::make_unique<sim::Kernel>(*authority_, *log_)),
      middleware_(std::make_unique<mw::Middleware>(*kernel_)),
      sessions_(std::make_unique<SessionManager>(*kernel_)) {}

std::optional<EntityId> Runner::entity(const std::string& name) const {
  auto it = entities_.find(name);
  if (it == entities_.end()) return std::nullopt;
  return it->second;
}

std::optional<Tag> Runner::tag(const std::string& name) const {
  auto it = tags_.find(name);
  if (it == tags_.end()) return std::nullopt;
  return it->second;
}

EntityId Runner::resolve_entity(const std::string& name) const {
  auto it = entities_.find(name);
  if (it == entities_.end()) throw Error(Errc::unknown_entity, "'" + name + "' does not exist");
  return it->second;
}

Tag Runner::resolve_tag(const std::string& name) const {
  auto it = tags_.find(name);
  if (it == tags_.end()) throw Error(Errc::unknown_tag, "tag '" + name + "' was never created");
  return it->second;
}

std::vector<Tag> Runner::resolve_tags(const std::vector<std::string>& names) const {
  std::vector<Tag> out;
  for (const auto& n : names) out.push_back(resolve_tag(n));
  return out;
}

SecurityContext Runner::resolve_context(const LabelSpec& spec) const {
  auto s = resolve_tags(spec.secrecy);
  auto i = resolve_tags(spec.integrity);
  return SecurityContext(Label(TagKind::secrecy, s), Label(TagKind::integrity, i));
}

PrivilegeSets Runner::resolve_privileges(const PrivilegeSpec& spec) const {
  PrivilegeSets p;
  p.add_secrecy = Label(TagKind::secrecy, resolve_tags(spec.add_secrecy));
  p.remove_secrecy = Label(TagKind::secrecy, resolve_tags(spec.remove_secrecy));
  p.add_integrity = Label(TagKind::integrity, resolve_tags(spec.add_integrity));
  p.remove_integrity = Label(TagKind::integrity, resolve_tags(spec.remove_integrity));
  return p;
}

void Runner::ensure_machine(const std::string& name) {
  if (!kernel_->has_machine(name)) kernel_->add_machine(name);
}

std::string Runner::describe(const Decision& d) const {
  if (d.allowed) return d.detail;
  std::string s = d.reason;
  if (!d.offending.empty()) {
    s += " [";
    for (std::size_t i = 0; i < d.offending.size(); ++i) {
      if (i) s += ",";
      s += authority_->name_of(d.offending[i]);
    }
    s += "]";
  }
  if (!d.detail.empty()) s += "; " + d.detail;
  return s;
}

Runner::Step Runner::from_decision(const Decision& d) const {
  return Step{d.allowed ? Outcome::allow : Outcome::deny, describe(d)};
}

Runner::Step Runner::execute(const Statement& st) {
  sim::Kernel& k = *kernel_;
  return std::visit(
      overloaded{
          [&](const MachineDecl& d) {
            ensure_machine(d.name);
            return Step{};
          },
          [&](const TagDecl& d) {
            tags_.insert_or_assign(d.name, authority_->declare(d.kind, d.name));
            return Step{};
          },
          [&](const ConflictDecl& d) {
            authority_->register_conflict(ConflictSet(d.name, resolve_tags(d.tags)));
            return Step{};
          },
          [&](const EntityDecl& d) {
            ensure_machine(d.machine);
            sim::BootSpec spec;
            spec.name = d.name;
            spec.role = d.role;
            spec.context = resolve_context(d.context);
            spec.privileges = resolve_privileges(d.privileges);
            spec.trusted = d.trusted;
            spec.payload = d.data.value_or("");
            EntityId id = d.cls == sim::EntityClass::process
                              ? k.boot_process(d.machine, std::move(spec))
                              : k.boot_object(d.machine, d.cls, std::move(spec));
            entities_.emplace(d.name, id);
            return Step{Outcome::ok, to_string(id)};
          },
          [&](const SchemaDecl& d) {
            std::vector<mw::AttributeSpec> attrs;
            for (const auto& a : d.attributes) {
              attrs.push_back(mw::AttributeSpec{
                  a.name, a.fixed ? std::optional(resolve_context(*a.fixed)) : std::nullopt});
            }
            middleware_->define_schema(mw::MessageSchema(d.name, std::move(attrs)));
            return Step{};
          },
          [&](const PrincipalDecl& d) {
            sessions_->add_principal(Principal{d.user, resolve_context(d.context)});
            return Step{};
          },
          [&](const AppDecl& d) {
            sessions_->define_app(d.name, d.init.value_or(""));
            return Step{};
          },
          [&](const AuthorizeDecl& d) {
            sessions_->authorize(resolve_entity(d.gateway), d.user);
            return Step{};
          },
          [&](const SpawnCmd& d) {
            EntityId id = k.spawn(resolve_entity(d.parent), d.trusted, d.child);
            entities_.emplace(d.child, id);
            return Step{Outcome::allow, to_string(id)};
          },
          [&](const CreateCmd& d) {
            EntityId id = k.create_object(resolve_entity(d.creator), d.cls, d.object);
            entities_.emplace(d.object, id);
            return Step{Outcome::allow, to_string(id)};
          },
          [&](const WriteCmd& d) {
            auto w = resolve_entity(d.writer);
            auto o = resolve_entity(d.object);
            return from_decision(d.data ? k.write(w, o, *d.data) : k.write_memory(w, o));
          },
          [&](const ReadCmd& d) {
            return from_decision(k.read(resolve_entity(d.reader), resolve_entity(d.object)).decision);
          },
          [&](const ComputeCmd& d) {
            k.append_memory(resolve_entity(d.process), d.data);
            return Step{};
          },
          [&](const LabelCmd& d) {
            return from_decision(
                k.change_label(resolve_entity(d.entity), resolve_tag(d.tag), d.op, d.dimension));
          },
          [&](const NewTagCmd& d) {
            auto r = k.create_tag(resolve_entity(d.process), d.kind, d.name);
            if (r.tag) tags_.insert_or_assign(d.name, *r.tag);
            Step s = from_decision(r.decision);
            if (r.tag) s.detail = "#" + std::to_string(r.tag->id);
            return s;
          },
          [&](const DelegateCmd& d) {
            return from_decision(k.delegate(resolve_entity(d.granter), resolve_entity(d.grantee),
                                            resolve_tag(d.tag), d.op, d.dimension));
          },
          [&](const SetContextCmd& d) {
            return from_decision(k.trusted_set_context(resolve_entity(d.actor),
                                                       resolve_entity(d.target),
                                                       resolve_context(d.context),
                                                       resolve_privileges(d.privileges)));
          },
          [&](const CheckpointCmd& d) {
            checkpoints_.insert_or_assign(d.checkpoint, k.checkpoint(resolve_entity(d.process)));
            return Step{};
          },
          [&](const RestoreCmd& d) {
            auto it = checkpoints_.find(d.checkpoint);
            if (it == checkpoints_.end()) {
              throw Error(Errc::invalid_argument, "checkpoint '" + d.checkpoint + "' was never taken");
            }
            return from_decision(k.restore(resolve_entity(d.process), it->second));
          },
          [&](const RegisterCmd& d) {
            EntityId e = resolve_entity(d.entity);
            mw::TagAssertion assertion{e, {}, authority_->id()};
            if (d.claims) {
              assertion.tags = resolve_tags(*d.claims);
            } else {
              auto ctx = k.context(e);
              assertion.tags.assign(ctx.secrecy.begin(), ctx.secrecy.end());
              assertion.tags.insert(assertion.tags.end(), ctx.integrity.begin(), ctx.integrity.end());
            }
            middleware_->register_endpoint(e, resolve_entity(d.proxy), std::move(assertion));
            return Step{};
          },
          [&](const ConnectCmd& d) {
            auto conn = middleware_->connect(resolve_entity(d.a), resolve_entity(d.b), d.both);
            connections_.emplace(d.name, conn.id);
            Step s = from_decision(conn.decision);
            if (conn.decision) s.detail = "connection " + std::to_string(conn.id);
            return s;
          },
          [&](const SendCmd& d) {
            EntityId sender = resolve_entity(d.sender);
            const auto& schema = middleware_->schema(d.schema);
            std::vector<std::pair<std::string, std::string>> values;
            for (const auto& v : d.values) values.emplace_back(v.attribute, v.value);
            mw::Message msg = mw::make_message(schema, values);
            for (const auto& v : d.values) {
              if (v.label) {
                msg = middleware_->label_attribute(sender, std::move(msg), v.attribute,
                                                   resolve_context(*v.label));
              }
            }
            auto r = middleware_->send(sender, connections_.at(d.connection), msg);
            Step s = from_decision(r.decision);
            if (r.decision && !r.stripped.empty()) {
              s.detail = "stripped on send:";
              for (const auto& a : r.stripped) s.detail += " " + a;
            }
            return s;
          },
          [&](const ReceiveCmd& d) {
            EntityId receiver = resolve_entity(d.receiver);
            auto r = middleware_->receive(receiver, connections_.at(d.connection));
            last_received_.insert_or_assign(receiver, r.message);
            Step s{Outcome::allow, "message " + std::to_string(r.message_id)};
            if (!r.stripped.empty()) {
              s.detail += "; stripped on receive:";
              for (const auto& a : r.stripped) s.detail += " " + a;
            }
            return s;
          },
          [&](const DirectConnectCmd& d) {
            return from_decision(k.direct_connect(resolve_entity(d.a), resolve_entity(d.b)));
          },
          [&](const DirectSendCmd& d) {
            return from_decision(k.direct_send(resolve_entity(d.from), resolve_entity(d.to), d.data));
          },
          [&](const SessionOpenCmd& d) {
            auto b = sessions_->open(d.session, resolve_entity(d.gateway), d.user, d.app);
            entities_.insert_or_assign(d.session, b.instance);
            return Step{Outcome::allow, "instance " + to_string(b.instance)};
          },
          [&](const SessionCloseCmd& d) {
            sessions_->close(d.session);
            return Step{};
          },
          [&](const ExpectPayloadCmd& d) {
            std::string payload = k.payload(resolve_entity(d.entity));
            bool found = payload.find(d.text) != std::string::npos;
            if (found == d.contains) return Step{};
            return Step{Outcome::deny, std::string(found ? "payload contains" : "payload lacks") +
                                           " the text"};
          },
          [&](const ExpectContextCmd& d) {
            auto actual = k.context(resolve_entity(d.entity));
            if (actual == resolve_context(d.context)) return Step{};
            return Step{Outcome::deny, "context is " + sim::context_metadata(actual)};
          },
          [&](const ExpectAttrCmd& d) {
            auto it = last_received_.find(resolve_entity(d.receiver));
            if (it == last_received_.end()) {
              throw Error(Errc::invalid_argument, "'" + d.receiver + "' has received nothing");
            }
            const mw::Attribute* a = it->second.find(d.attribute);
            if (!a) throw Error(Errc::schema_violation, "no attribute '" + d.attribute + "'");
            if (a->value == d.value) return Step{};
            return Step{Outcome::deny,
                        a->value ? "value is \"" + *a->value + "\"" : std::string("value is null")};
          },
      },
      st.body);
}

RunReport Runner::run(const Program& program) {
  ensure_machine("local");
  RunReport report;
  for (std::size_t i = 0; i < program.statements.size(); ++i) {
    const Statement& st = program.statements[i];
    CommandResult r;
    r.index = i + 1;
    r.loc = st.loc;
    r.statement = print(st);
    r.expect = st.expect;
    try {
      Step s = execute(st);
      r.outcome = s.outcome;
      r.detail = std::move(s.detail);
    } catch (const std::exception& e) {
      r.outcome = Outcome::error;
      r.detail = e.what();
    }
    Expectation effective =
        st.expect == Expectation::none && is_assertion(st) ? Expectation::allow : st.expect;
    r.met = meets(r.outcome, effective);
    report.results.push_back(r);
    if (!r.met) {
      report.failed_index = r.index;
      report.failure = r.outcome == Outcome::error
                           ? "runtime error: " + r.detail
                           : "expected " + std::string(expectation_text(effective)) + ", got " +
                                 std::string(to_string(r.outcome)) +
                                 (r.detail.empty() ? "" : " (" + r.detail + ")");
      break;
    }
  }
  return report;
}

RunReport run_text(std::string_view text, Runner& runner) { return runner.run(parse(text)); }

}  // namespace camflow::scenario
