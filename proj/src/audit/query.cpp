#include "camflow/audit/query.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

#include "camflow/error.hpp"

namespace camflow::audit {

namespace {

[[noreturn]] void bad_predicate(std::string_view text, const std::string& why) {
  throw Error(Errc::invalid_argument, "predicate '" + std::string(text) + "': " + why);
}

std::vector<std::string_view> split_clauses(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == text.size()) break;
    std::size_t start = i;
    int depth = 0;
    while (i < text.size() && (depth > 0 || !std::isspace(static_cast<unsigned char>(text[i])))) {
      if (text[i] == '[') ++depth;
      if (text[i] == ']') --depth;
      ++i;
    }
    out.push_back(text.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Label parse_tag_list(std::string_view clause, std::string_view list, TagKind kind,
                     const TagResolver& resolve) {
  if (list.size() < 2 || list.front() != '[' || list.back() != ']') {
    bad_predicate(clause, "tag list must be bracketed");
  }
  list = list.substr(1, list.size() - 2);
  Label label(kind);
  while (!trim(list).empty()) {
    auto comma = list.find(',');
    auto item = trim(list.substr(0, comma));
    if (item.empty()) bad_predicate(clause, "empty tag name");
    std::optional<Tag> tag;
    if (item.front() == '#') {
      try {
        tag = Tag{std::stoull(std::string(item.substr(1))), kind};
      } catch (const std::exception&) {
        bad_predicate(clause, "bad tag id");
      }
    } else if (resolve) {
      tag = resolve(item);
    }
    if (!tag) bad_predicate(clause, "unknown tag '" + std::string(item) + "'");
    if (tag->kind != kind) bad_predicate(clause, "tag '" + std::string(item) + "' has the wrong kind");
    label.insert(*tag);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return label;
}

NodePredicate parse_clause(std::string_view clause, const TagResolver& resolve) {
  bool negate = false;
  std::string_view body = clause;
  if (body.starts_with('!')) {
    negate = true;
    body.remove_prefix(1);
  }
  NodePredicate pred;
  if (body == "any") {
    pred = [](const GraphNode&) { return true; };
  } else if (body.starts_with("name=")) {
    pred = [v = std::string(body.substr(5))](const GraphNode& n) { return n.name == v; };
  } else if (body.starts_with("role=")) {
    pred = [v = std::string(body.substr(5))](const GraphNode& n) { return n.role == v; };
  } else if (body.starts_with("entity=")) {
    EntityId id;
    try {
      id = parse_entity_id(std::string(body.substr(7)));
    } catch (const Error&) {
      bad_predicate(clause, "bad entity id");
    }
    pred = [id](const GraphNode& n) { return n.entity == id; };
  } else if (body.starts_with("S") || body.starts_with("I")) {
    TagKind kind = body.front() == 'S' ? TagKind::secrecy : TagKind::integrity;
    body.remove_prefix(1);
    enum class Op { eq, superset, subset } op;
    if (body.starts_with(">=")) {
      op = Op::superset;
      body.remove_prefix(2);
    } else if (body.starts_with("<=")) {
      op = Op::subset;
      body.remove_prefix(2);
    } else if (body.starts_with("=")) {
      op = Op::eq;
      body.remove_prefix(1);
    } else {
      bad_predicate(clause, "expected =, >= or <=");
    }
    Label want = parse_tag_list(clause, body, kind, resolve);
    pred = [kind, op, want = std::move(want)](const GraphNode& n) {
      const Label& have = n.context.label(kind);
      switch (op) {
        case Op::eq: return have == want;
        case Op::superset: return want.is_subset_of(have);
        case Op::subset: return have.is_subset_of(want);
      }
      return false;
    };
  } else {
    bad_predicate(clause, "unknown clause");
  }
  if (negate) return [pred](const GraphNode& n) { return !pred(n); };
  return pred;
}

bool traversable(const AuditEvent& e, const PathQueryOptions& options) {
  if (!e.allowed && !options.include_denied) return false;
  if (e.kind == EventKind::privilege_delegation && !options.include_delegation) return false;
  return true;
}

class PathSearch {
 public:
  PathSearch(const FlowGraph& g, std::vector<char> from, const PathQueryOptions& opt,
             PathQueryResult& result)
      : g_(g), from_(std::move(from)), opt_(opt), result_(result), on_path_(g.nodes().size(), 0) {}

  void run_from_end(std::size_t end) {
    nodes_ = {end};
    edges_.clear();
    on_path_[end] = 1;
    extend(end, std::numeric_limits<EventId>::max());
    on_path_[end] = 0;
  }

 private:
  // Walks backwards: every edge taken must be older than the one after it.
  void extend(std::size_t node, EventId bound) {
    for (std::size_t ei : g_.incoming(node)) {
      if (result_.path_cap_hit) return;
      const GraphEdge& edge = g_.edges()[ei];
      if (edge.event.id >= bound || !traversable(edge.event, opt_)) continue;
      if (on_path_[edge.from]) continue;
      if (nodes_.size() + 1 > opt_.max_nodes) {
        result_.node_cap_hit = true;
        continue;
      }
      nodes_.push_back(edge.from);
      edges_.push_back(ei);
      on_path_[edge.from] = 1;
      if (from_[edge.from]) emit();
      extend(edge.from, edge.event.id);
      on_path_[edge.from] = 0;
      nodes_.pop_back();
      edges_.pop_back();
    }
  }

  void emit() {
    if (result_.paths.size() >= opt_.max_paths) {
      result_.path_cap_hit = true;
      return;
    }
    DisclosurePath p;
    p.nodes.assign(nodes_.rbegin(), nodes_.rend());
    p.edges.assign(edges_.rbegin(), edges_.rend());
    for (auto ei : p.edges) p.event_ids.push_back(g_.edges()[ei].event.id);
    result_.paths.push_back(std::move(p));
  }

  const FlowGraph& g_;
  std::vector<char> from_;
  const PathQueryOptions& opt_;
  PathQueryResult& result_;
  std::vector<char> on_path_;
  std::vector<std::size_t> nodes_;  // reversed: end node first
  std::vector<std::size_t> edges_;
};

}  // namespace

NodePredicate parse_node_predicate(std::string_view text, const TagResolver& resolve) {
  auto clauses = split_clauses(text);
  if (clauses.empty()) bad_predicate(text, "empty");
  std::vector<NodePredicate> parts;
  for (auto c : clauses) parts.push_back(parse_clause(c, resolve));
  return [parts = std::move(parts)](const GraphNode& n) {
    return std::all_of(parts.begin(), parts.end(), [&](const NodePredicate& p) { return p(n); });
  };
}

PathQueryResult find_disclosure_paths(const FlowGraph& graph, const NodePredicate& from,
                                      const NodePredicate& to, const PathQueryOptions& options) {
  PathQueryResult result;
  const auto& nodes = graph.nodes();
  std::vector<char> is_from(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) is_from[i] = from(nodes[i]) ? 1 : 0;

  PathSearch search(graph, std::move(is_from), options, result);
  for (std::size_t i = 0; i < nodes.size() && !result.path_cap_hit; ++i) {
    if (to(nodes[i])) search.run_from_end(i);
  }
  std::sort(result.paths.begin(), result.paths.end(), [](const auto& a, const auto& b) {
    if (a.event_ids != b.event_ids) return a.event_ids < b.event_ids;
    return a.nodes < b.nodes;
  });
  return result;
}

ComplianceVerdict check_compliance(const FlowGraph& graph, const ComplianceRule& rule,
                                   const PathQueryOptions& options) {
  ComplianceVerdict verdict;
  auto result = find_disclosure_paths(graph, rule.from, rule.to, options);
  verdict.complete = result.complete();
  for (auto& path : result.paths) {
    bool ok = std::all_of(rule.waypoints.begin(), rule.waypoints.end(), [&](const auto& wp) {
      return std::any_of(path.nodes.begin(), path.nodes.end(),
                         [&](std::size_t n) { return wp(graph.nodes()[n]); });
    });
    if (!ok) verdict.counterexamples.push_back(std::move(path));
  }
  verdict.compliant = verdict.counterexamples.empty();
  return verdict;
}

bool auditor_may_see(const AuditEvent& event, const Label& auditor_secrecy) {
  return event.source.context.secrecy.is_subset_of(auditor_secrecy) &&
         event.target.context.secrecy.is_subset_of(auditor_secrecy);
}

std::vector<AuditEvent> auditor_view(std::span<const AuditEvent> events,
                                     const SecurityContext& auditor) {
  std::vector<AuditEvent> out;
  for (const auto& e : events) {
    if (auditor_may_see(e, auditor.secrecy)) out.push_back(e);
  }
  return out;
}

}  // namespace camflow::audit
