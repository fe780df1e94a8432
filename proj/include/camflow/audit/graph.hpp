#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "camflow/audit/log.hpp"

namespace camflow::audit {

/// Log-volume knobs. Filters apply before graph construction, so a graph is
/// always a pure function of (log, config).
struct GranularityConfig {
  bool drop_metadata = false;
  bool context_changes_only = false;
  std::optional<SecurityContext> target_context;  // keep events touching it
  bool exclude_unlabelled = false;                // drop events with an unlabelled endpoint
  bool include_denied = false;

  friend bool operator==(const GranularityConfig&, const GranularityConfig&) = default;
};

/// Comma-separated levels: full, no-metadata, context-changes,
/// labelled-only, with-denied. Throws invalid_argument.
GranularityConfig parse_granularity(std::string_view text);

/// Applies every filter except include_denied (logs keep denials).
std::vector<AuditEvent> filter_events(std::span<const AuditEvent> events,
                                      const GranularityConfig& config);

/// Graph node: one entity in one security context. An entity that changes
/// context gets a further node, joined by the context-change edge; returning
/// to an earlier context reuses that context's node.
struct GraphNode {
  EntityId entity;
  SecurityContext context;
  std::string name;
  std::string role;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  AuditEvent event;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

class FlowGraph {
 public:
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }
  const std::vector<std::size_t>& incoming(std::size_t node) const { return in_[node]; }
  const std::vector<std::size_t>& outgoing(std::size_t node) const { return out_[node]; }

  std::optional<std::size_t> find_node(const EntityId& entity, const SecurityContext& ctx) const;
  std::vector<std::size_t> nodes_of(const EntityId& entity) const;
  /// Node name, falling back to the entity id.
  std::string display_name(std::size_t node) const;

  friend bool operator==(const FlowGraph& a, const FlowGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  friend FlowGraph build_graph(std::span<const AuditEvent>, const GranularityConfig&);
  std::size_t node_for(const Endpoint& ep);

  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> out_;
};

/// Throws Error{malformed_record} if event ids are not strictly increasing.
FlowGraph build_graph(std::span<const AuditEvent> events, const GranularityConfig& config = {});

}  // namespace camflow::audit
