#include "camflow/audit/export.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "camflow/error.hpp"

namespace camflow::audit {

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

void write_dot(std::ostream& out, const FlowGraph& g, std::span<const TagInfo> tags) {
  out << "digraph audit {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < g.nodes().size(); ++i) {
    const auto& n = g.nodes()[i];
    std::string label = g.display_name(i) + "\n" + format_context(n.context, tags);
    out << "  n" << i << " [label=\"" << dot_escape(label) << "\", tooltip=\""
        << dot_escape(to_string(n.entity)) << "\"];\n";
  }
  for (const auto& e : g.edges()) {
    out << "  n" << e.from << " -> n" << e.to << " [label=\"e" << e.event.id << " "
        << to_string(e.event.kind) << "\"";
    if (!e.event.allowed) out << ", style=dashed, color=red";
    if (e.event.kind == EventKind::context_change) out << ", color=blue";
    out << "];\n";
  }
  out << "}\n";
}

}  // namespace

std::string format_context(const SecurityContext& ctx, std::span<const TagInfo> tags) {
  std::unordered_map<std::uint64_t, std::string_view> names;
  for (const auto& t : tags) names.emplace(t.tag.id, t.name);
  auto list = [&](const Label& l) {
    std::string s = "{";
    bool first = true;
    for (const auto& t : l) {
      if (!first) s += ",";
      first = false;
      auto it = names.find(t.id);
      s += (it != names.end() && !it->second.empty()) ? std::string(it->second)
                                                      : "#" + std::to_string(t.id);
    }
    return s + "}";
  };
  return "[S=" + list(ctx.secrecy) + " I=" + list(ctx.integrity) + "]";
}

void export_graph(std::ostream& out, const FlowGraph& graph, ExportFormat format,
                  std::span<const TagInfo> tags) {
  if (format == ExportFormat::dot) {
    write_dot(out, graph, tags);
    return;
  }
  std::vector<AuditEvent> events;
  events.reserve(graph.edges().size());
  for (const auto& e : graph.edges()) events.push_back(e.event);
  write_edge_list(out, events, tags);
}

std::string export_graph(const FlowGraph& graph, ExportFormat format,
                         std::span<const TagInfo> tags) {
  std::ostringstream os;
  export_graph(os, graph, format, tags);
  return os.str();
}

void export_graph(const std::filesystem::path& path, const FlowGraph& graph, ExportFormat format,
                  std::span<const TagInfo> tags) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open '" + path.string() + "' for writing");
  export_graph(out, graph, format, tags);
  out.flush();
  if (!out) throw Error(Errc::io_error, "write to '" + path.string() + "' failed");
}

}  // namespace camflow::audit
