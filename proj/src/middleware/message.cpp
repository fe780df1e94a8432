#include "camflow/mw/message.hpp"

#include <set>

#include "camflow/error.hpp"

namespace camflow::mw {

MessageSchema::MessageSchema(std::string n, std::vector<AttributeSpec> attrs)
    : name(std::move(n)), attributes(std::move(attrs)) {
  if (name.empty()) throw Error(Errc::schema_violation, "schema needs a name");
  std::set<std::string_view> seen;
  for (const auto& a : attributes) {
    if (a.name.empty()) throw Error(Errc::schema_violation, "schema '" + name + "': empty attribute name");
    if (!seen.insert(a.name).second) {
      throw Error(Errc::schema_violation, "schema '" + name + "': duplicate attribute '" + a.name + "'");
    }
  }
}

const AttributeSpec* MessageSchema::find(std::string_view attribute) const noexcept {
  for (const auto& a : attributes) {
    if (a.name == attribute) return &a;
  }
  return nullptr;
}

Attribute* Message::find(std::string_view name) noexcept {
  for (auto& a : attributes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const Attribute* Message::find(std::string_view name) const noexcept {
  for (const auto& a : attributes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

Message make_message(const MessageSchema& schema,
                     const std::vector<std::pair<std::string, std::string>>& values) {
  Message msg{schema.name, {}};
  for (const auto& [name, value] : values) {
    if (!schema.find(name)) {
      throw Error(Errc::schema_violation,
                  "schema '" + schema.name + "' has no attribute '" + name + "'");
    }
    if (msg.find(name)) {
      throw Error(Errc::schema_violation, "attribute '" + name + "' given twice");
    }
    msg.attributes.push_back(Attribute{name, value, std::nullopt});
  }
  return conform(schema, msg);
}

Message conform(const MessageSchema& schema, const Message& msg) {
  if (msg.schema != schema.name) {
    throw Error(Errc::schema_violation,
                "message of schema '" + msg.schema + "' checked against '" + schema.name + "'");
  }
  std::set<std::string_view> seen;
  for (const auto& a : msg.attributes) {
    const AttributeSpec* spec = schema.find(a.name);
    if (!spec) {
      throw Error(Errc::schema_violation,
                  "schema '" + schema.name + "' has no attribute '" + a.name + "'");
    }
    if (!seen.insert(a.name).second) {
      throw Error(Errc::schema_violation, "attribute '" + a.name + "' given twice");
    }
    if (spec->fixed_label && a.label && *a.label != *spec->fixed_label) {
      throw Error(Errc::fixed_label, "attribute '" + a.name + "' carries a label other than its fixed one");
    }
  }
  Message out{schema.name, {}};
  for (const auto& spec : schema.attributes) {
    const Attribute* given = msg.find(spec.name);
    Attribute a = given ? *given : Attribute{spec.name, std::nullopt, std::nullopt};
    if (spec.fixed_label) a.label = spec.fixed_label;
    out.attributes.push_back(std::move(a));
  }
  return out;
}

Message set_attribute_label(const EntityState& producer, const MessageSchema& schema, Message msg,
                            std::string_view attribute, const SecurityContext& label) {
  if (!producer.active) throw Error(Errc::passive_entity, "a passive entity cannot label attributes");
  const AttributeSpec* spec = schema.find(attribute);
  Attribute* attr = msg.find(attribute);
  if (!spec || !attr) {
    throw Error(Errc::schema_violation, "no attribute '" + std::string(attribute) + "'");
  }
  if (spec->fixed_label) {
    throw Error(Errc::fixed_label, "attribute '" + std::string(attribute) + "' has a fixed label");
  }
  const auto& ctx = producer.context;
  const auto& priv = producer.privileges;
  for (const auto& t : label.secrecy) {
    if (!ctx.secrecy.contains(t) && !priv.add_secrecy.contains(t)) {
      throw Error(Errc::missing_privilege, "secrecy tag #" + std::to_string(t.id));
    }
  }
  for (const auto& t : label.integrity) {
    if (!ctx.integrity.contains(t) && !priv.add_integrity.contains(t)) {
      throw Error(Errc::missing_privilege, "integrity tag #" + std::to_string(t.id));
    }
  }
  attr->label = label;
  return msg;
}

std::string_view to_string(StripSide side) noexcept {
  return side == StripSide::send ? "send" : "receive";
}

StripOutcome strip_attributes(const Message& msg, const SecurityContext& holder, StripSide side,
                              const SecurityContext& default_label) {
  StripOutcome out{msg, {}};
  for (auto& a : out.message.attributes) {
    if (!a.value) continue;
    const SecurityContext& label = a.label ? *a.label : default_label;
    bool agrees = side == StripSide::send ? can_flow(holder, label).allowed
                                          : can_flow(label, holder).allowed;
    if (!agrees) {
      a.value.reset();
      out.stripped.push_back(a.name);
    }
  }
  return out;
}

}  // namespace camflow::mw
