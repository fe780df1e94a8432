#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "camflow/audit/graph.hpp"

namespace camflow::audit {

enum class ExportFormat { edge_list, dot };

/// Deterministic: edges in event-id order, nodes in first-seen order.
/// Tags print by name when `tags` knows them, else as #<id>.
void export_graph(std::ostream& out, const FlowGraph& graph, ExportFormat format,
                  std::span<const TagInfo> tags = {});
std::string export_graph(const FlowGraph& graph, ExportFormat format,
                         std::span<const TagInfo> tags = {});
/// Throws Error{io_error} if the file cannot be written.
void export_graph(const std::filesystem::path& path, const FlowGraph& graph,
                  ExportFormat format, std::span<const TagInfo> tags = {});

/// "[S={a,b} I={}]" using tag names from `tags` where available.
std::string format_context(const SecurityContext& ctx, std::span<const TagInfo> tags = {});

}  // namespace camflow::audit
