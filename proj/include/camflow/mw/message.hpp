#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camflow/ifc.hpp"

namespace camflow::mw {

struct AttributeSpec {
  std::string name;
  /// When set, every instance of the attribute carries exactly this label.
  std::optional<SecurityContext> fixed_label;

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

struct MessageSchema {
  std::string name;
  std::vector<AttributeSpec> attributes;

  MessageSchema() = default;
  /// Throws schema_violation on an empty name or duplicate attribute names.
  MessageSchema(std::string name, std::vector<AttributeSpec> attributes);

  const AttributeSpec* find(std::string_view attribute) const noexcept;

  friend bool operator==(const MessageSchema&, const MessageSchema&) = default;
};

struct Attribute {
  std::string name;
  std::optional<std::string> value;  // nullopt once stripped
  std::optional<SecurityContext> label;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Message {
  std::string schema;
  std::vector<Attribute> attributes;

  Attribute* find(std::string_view name) noexcept;
  const Attribute* find(std::string_view name) const noexcept;

  friend bool operator==(const Message&, const Message&) = default;
};

/// Instance of `schema` with the given values; fixed labels are applied and
/// attributes not mentioned are present but null. Throws schema_violation on
/// unknown or repeated names.
Message make_message(const MessageSchema& schema,
                     const std::vector<std::pair<std::string, std::string>>& values);

/// Checks `msg` against `schema` and returns it in schema attribute order with
/// missing attributes added as null. Throws schema_violation.
Message conform(const MessageSchema& schema, const Message& msg);

/// Producer-side labelling of a free attribute. Each secrecy tag of `label`
/// must be in the producer's S or P+S, and each integrity tag in its I or
/// P+I. Throws fixed_label, missing_privilege, passive_entity or
/// schema_violation.
Message set_attribute_label(const EntityState& producer, const MessageSchema& schema, Message msg,
                            std::string_view attribute, const SecurityContext& label);

enum class StripSide : std::uint8_t { send, receive };

std::string_view to_string(StripSide side) noexcept;

struct StripOutcome {
  Message message;
  std::vector<std::string> stripped;  // attributes nulled by this pass
};

/// Nulls every attribute whose label does not agree with `holder`. On send,
/// the holder is the sender and the attribute must satisfy
/// can_flow(holder, label); on receive, can_flow(label, holder). Unlabelled
/// attributes are judged with `default_label` (the sender's context).
/// Attributes that are already null are left alone and not reported.
StripOutcome strip_attributes(const Message& msg, const SecurityContext& holder, StripSide side,
                              const SecurityContext& default_label);

}  // namespace camflow::mw
