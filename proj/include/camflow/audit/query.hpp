#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "camflow/audit/graph.hpp"

namespace camflow::audit {

using NodePredicate = std::function<bool(const GraphNode&)>;
using TagResolver = std::function<std::optional<Tag>(std::string_view)>;

/// Parses a conjunction of whitespace-separated clauses:
///   S=[a,b]  S>=[a]  S<=[a,b]  I=[...]  name=x  role=x  entity=m:3  any
/// Any clause may be negated with a leading '!'. Tags are names resolved by
/// `resolve`, or `#<id>` literals. Throws Error{invalid_argument}.
NodePredicate parse_node_predicate(std::string_view text, const TagResolver& resolve);

struct PathQueryOptions {
  std::size_t max_nodes = 32;  // simple paths longer than this are not explored
  std::size_t max_paths = 100000;
  bool include_denied = false;
  bool include_delegation = false;  // privilege delegations carry no data
};

struct DisclosurePath {
  std::vector<std::size_t> nodes;  // first = source, last = entity under investigation
  std::vector<std::size_t> edges;
  std::vector<EventId> event_ids;  // strictly increasing

  friend bool operator==(const DisclosurePath&, const DisclosurePath&) = default;
};

struct PathQueryResult {
  std::vector<DisclosurePath> paths;  // sorted by event-id sequence
  bool node_cap_hit = false;
  bool path_cap_hit = false;

  bool complete() const noexcept { return !node_cap_hit && !path_cap_hit; }
};

/// All simple paths of at least one edge from a node matching `from` to a
/// node matching `to` whose edge event ids strictly increase. For each
/// matching end node, only edges older than its last incoming edge can
/// participate; results are the union over end nodes.
PathQueryResult find_disclosure_paths(const FlowGraph& graph, const NodePredicate& from,
                                      const NodePredicate& to,
                                      const PathQueryOptions& options = {});

struct ComplianceRule {
  NodePredicate from;
  NodePredicate to;
  std::vector<NodePredicate> waypoints;  // each must match some node on every path
};

struct ComplianceVerdict {
  bool compliant = true;
  bool complete = true;  // false if the path search hit a cap
  std::vector<DisclosurePath> counterexamples;
};

ComplianceVerdict check_compliance(const FlowGraph& graph, const ComplianceRule& rule,
                                   const PathQueryOptions& options = {});

/// S(origin) ∪ S(destination) ⊆ S(auditor). Integrity is ignored.
bool auditor_may_see(const AuditEvent& event, const Label& auditor_secrecy);

std::vector<AuditEvent> auditor_view(std::span<const AuditEvent> events,
                                     const SecurityContext& auditor);

}  // namespace camflow::audit
