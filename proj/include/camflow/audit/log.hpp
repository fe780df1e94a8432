#pragma once

#include <iosfwd>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "camflow/entity_id.hpp"
#include "camflow/ifc.hpp"
#include "camflow/naming.hpp"

namespace camflow::audit {

enum class EventKind : std::uint8_t { data_flow, creation_flow, context_change, privilege_delegation };

std::string_view to_string(EventKind kind) noexcept;
EventKind parse_event_kind(std::string_view text);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// An entity together with its context at decision time.
struct Endpoint {
  EntityId entity;
  SecurityContext context;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct AuditEvent {
  EventId id = 0;
  EventKind kind = EventKind::data_flow;
  bool allowed = true;
  std::string reason;  // empty when allowed
  Endpoint source;
  Endpoint target;
  bool via_trusted = false;
  Metadata metadata;

  /// Empty view when the key is absent.
  std::string_view meta(std::string_view key) const noexcept;

  friend bool operator==(const AuditEvent&, const AuditEvent&) = default;
};

/// Append-only event log. The id counter is the single global ordering
/// point for every enforcement layer.
class AuditLog {
 public:
  AuditLog() = default;
  AuditLog(const AuditLog&) = delete;
  AuditLog& operator=(const AuditLog&) = delete;

  /// Assigns id = previous max + 1 (ignoring draft.id) and appends.
  EventId record(AuditEvent draft);

  std::vector<AuditEvent> snapshot() const;
  std::size_t size() const;
  EventId last_id() const;

 private:
  mutable std::mutex mu_;
  std::vector<AuditEvent> events_;
};

struct LogFile {
  std::vector<TagInfo> tags;
  std::vector<AuditEvent> events;
};

/// Newline-delimited, tab-separated records. See docs/log-format.md.
void write_edge_list(std::ostream& out, std::span<const AuditEvent> events,
                     std::span<const TagInfo> tags = {});
std::string format_edge_list(std::span<const AuditEvent> events,
                             std::span<const TagInfo> tags = {});
/// Throws Error{malformed_record} with the offending line number.
LogFile read_edge_list(std::istream& in);
LogFile parse_edge_list(std::string_view text);

}  // namespace camflow::audit
