#include "camflow/audit/graph.hpp"

#include <unordered_map>

#include "camflow/error.hpp"

namespace camflow::audit {

namespace {

bool touches(const AuditEvent& e, const SecurityContext& ctx) {
  return e.source.context == ctx || e.target.context == ctx;
}

}  // namespace

GranularityConfig parse_granularity(std::string_view text) {
  GranularityConfig cfg;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto level = text.substr(0, comma);
    if (level == "full") {
      // default
    } else if (level == "no-metadata") {
      cfg.drop_metadata = true;
    } else if (level == "context-changes") {
      cfg.context_changes_only = true;
    } else if (level == "labelled-only") {
      cfg.exclude_unlabelled = true;
    } else if (level == "with-denied") {
      cfg.include_denied = true;
    } else {
      throw Error(Errc::invalid_argument, "unknown granularity '" + std::string(level) + "'");
    }
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return cfg;
}

std::vector<AuditEvent> filter_events(std::span<const AuditEvent> events,
                                      const GranularityConfig& config) {
  std::vector<AuditEvent> out;
  for (const auto& e : events) {
    if (config.context_changes_only && e.kind != EventKind::context_change) continue;
    if (config.target_context && !touches(e, *config.target_context)) continue;
    if (config.exclude_unlabelled &&
        (e.source.context.unlabelled() || e.target.context.unlabelled())) {
      continue;
    }
    out.push_back(e);
    if (config.drop_metadata) out.back().metadata.clear();
  }
  return out;
}

std::optional<std::size_t> FlowGraph::find_node(const EntityId& entity,
                                                const SecurityContext& ctx) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].entity == entity && nodes_[i].context == ctx) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> FlowGraph::nodes_of(const EntityId& entity) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].entity == entity) out.push_back(i);
  }
  return out;
}

std::string FlowGraph::display_name(std::size_t node) const {
  const auto& n = nodes_.at(node);
  return n.name.empty() ? to_string(n.entity) : n.name;
}

std::size_t FlowGraph::node_for(const Endpoint& ep) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].entity == ep.entity && nodes_[i].context == ep.context) return i;
  }
  nodes_.push_back(GraphNode{ep.entity, ep.context, {}, {}});
  in_.emplace_back();
  out_.emplace_back();
  return nodes_.size() - 1;
}

FlowGraph build_graph(std::span<const AuditEvent> events, const GranularityConfig& config) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].id <= events[i - 1].id) {
      throw Error(Errc::malformed_record,
                  "event " + std::to_string(events[i].id) + " out of order");
    }
  }
  FlowGraph g;
  std::unordered_map<EntityId, std::string> names, roles;
  auto note = [](auto& map, const EntityId& id, std::string_view value) {
    if (!value.empty()) map.try_emplace(id, std::string(value));
  };

  for (auto& e : filter_events(events, config)) {
    if (!e.allowed && !config.include_denied) continue;
    note(names, e.source.entity, e.meta("src_name"));
    note(names, e.target.entity, e.meta("dst_name"));
    note(roles, e.source.entity, e.meta("src_role"));
    note(roles, e.target.entity, e.meta("dst_role"));
    std::size_t from = g.node_for(e.source);
    std::size_t to = g.node_for(e.target);
    g.out_[from].push_back(g.edges_.size());
    g.in_[to].push_back(g.edges_.size());
    g.edges_.push_back(GraphEdge{from, to, std::move(e)});
  }
  for (auto& n : g.nodes_) {
    if (auto it = names.find(n.entity); it != names.end()) n.name = it->second;
    if (auto it = roles.find(n.entity); it != roles.end()) n.role = it->second;
  }
  return g;
}

}  // namespace camflow::audit
