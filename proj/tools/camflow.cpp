// Command-line front end: scenario runs, audit queries, benchmarks.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "camflow/audit/export.hpp"
#include "camflow/audit/graph.hpp"
#include "camflow/audit/log.hpp"
#include "camflow/audit/query.hpp"
#include "camflow/error.hpp"
#include "camflow/scenario/bench.hpp"
#include "camflow/scenario/fixtures.hpp"
#include "camflow/scenario/program.hpp"
#include "camflow/scenario/runner.hpp"

namespace fs = std::filesystem;
using namespace camflow;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Relative log and graph paths live under $CAMFLOW_LOG_DIR when it is set.
fs::path log_path(const std::string& p) {
  fs::path path(p);
  const char* dir = std::getenv("CAMFLOW_LOG_DIR");
  if (path.is_relative() && dir && *dir) return fs::path(dir) / path;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
}

audit::LogFile load_log(const std::string& p) {
  try {
    return audit::parse_edge_list(read_file(log_path(p)));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

audit::TagResolver resolver_for(const audit::LogFile& log) {
  return [&log](std::string_view name) -> std::optional<Tag> {
    for (const auto& t : log.tags) {
      if (t.name == name) return t.tag;
    }
    return std::nullopt;
  };
}

std::string node_text(const audit::FlowGraph& g, std::size_t node,
                      const std::vector<TagInfo>& tags) {
  return g.display_name(node) + audit::format_context(g.nodes()[node].context, tags);
}

std::string path_text(const audit::FlowGraph& g, const audit::DisclosurePath& p,
                      const std::vector<TagInfo>& tags) {
  std::string s = node_text(g, p.nodes.front(), tags);
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    s += " -e" + std::to_string(p.event_ids[i]) + "-> " + node_text(g, p.nodes[i + 1], tags);
  }
  return s;
}

// -- run -----------------------------------------------------------------------

struct RunOptions {
  std::string file;
  std::string log;
  std::string graph;
  std::string granularity = "full";
  bool quiet = false;
};

int cmd_run(const RunOptions& o) {
  auto config = audit::parse_granularity(o.granularity);
  scenario::Program program;
  try {
    program = scenario::parse(read_file(o.file));
  } catch (const scenario::ParseError& e) {
    std::cerr << o.file << ":" << e.what() << "\n";
    return kUsage;
  }
  scenario::Runner runner;
  auto report = runner.run(program);
  if (!o.quiet || !report.passed()) std::cout << scenario::format_report(report);

  auto events = runner.log().snapshot();
  auto tags = runner.authority().all_tags();
  std::string log_target = o.log;
  if (log_target.empty() && std::getenv("CAMFLOW_LOG_DIR")) {
    log_target = fs::path(o.file).stem().string() + ".tsv";
  }
  if (!log_target.empty()) {
    write_file(log_path(log_target),
               audit::format_edge_list(audit::filter_events(events, config), tags));
  }
  if (!o.graph.empty()) {
    auto graph = audit::build_graph(events, config);
    write_file(log_path(o.graph), audit::export_graph(graph, audit::ExportFormat::dot, tags));
  }
  return report.passed() ? kOk : kFailed;
}

// -- audit ---------------------------------------------------------------------

struct QueryOptions {
  std::string log;
  std::string from;
  std::string to;
  std::vector<std::string> waypoints;
  std::string granularity = "full";
  bool with_denied = false;
  bool with_delegation = false;
  std::size_t max_nodes = 32;
};

int cmd_query(const QueryOptions& o) {
  auto log = load_log(o.log);
  auto resolve = resolver_for(log);
  auto config = audit::parse_granularity(o.granularity);
  config.include_denied = config.include_denied || o.with_denied;
  audit::PathQueryOptions options;
  options.max_nodes = o.max_nodes;
  options.include_denied = config.include_denied;
  options.include_delegation = o.with_delegation;

  audit::NodePredicate from, to;
  std::vector<audit::NodePredicate> waypoints;
  try {
    from = audit::parse_node_predicate(o.from, resolve);
    to = audit::parse_node_predicate(o.to, resolve);
    for (const auto& w : o.waypoints) waypoints.push_back(audit::parse_node_predicate(w, resolve));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto graph = audit::build_graph(log.events, config);

  if (waypoints.empty()) {
    auto result = audit::find_disclosure_paths(graph, from, to, options);
    std::cout << result.paths.size() << " disclosure path(s)\n";
    for (std::size_t i = 0; i < result.paths.size(); ++i) {
      std::cout << "  " << i + 1 << ": " << path_text(graph, result.paths[i], log.tags) << "\n";
    }
    if (!result.complete()) std::cout << "warning: search cap reached, result incomplete\n";
    return kOk;
  }

  auto verdict = audit::check_compliance(graph, {from, to, waypoints}, options);
  std::cout << (verdict.compliant ? "compliant" : "violation") << "\n";
  for (std::size_t i = 0; i < verdict.counterexamples.size(); ++i) {
    std::cout << "  counterexample " << i + 1 << ": "
              << path_text(graph, verdict.counterexamples[i], log.tags) << "\n";
  }
  if (!verdict.complete) std::cout << "warning: search cap reached, verdict incomplete\n";
  return verdict.compliant ? kOk : kFailed;
}

struct ViewOptions {
  std::string log;
  std::string auditor_s;
  std::string out;
};

int cmd_view(const ViewOptions& o) {
  auto log = load_log(o.log);
  Label secrecy(TagKind::secrecy);
  std::stringstream list(o.auditor_s);
  std::string name;
  while (std::getline(list, name, ',')) {
    if (name.empty()) continue;
    std::optional<Tag> tag;
    if (name.front() == '#') {
      std::uint64_t id = 0;
      try {
        id = std::stoull(name.substr(1));
      } catch (const std::exception&) {
        throw UsageError("bad tag id '" + name + "'");
      }
      tag = Tag{id, TagKind::secrecy};
    } else {
      tag = resolver_for(log)(name);
    }
    if (!tag) throw UsageError("unknown tag '" + name + "'");
    if (tag->kind != TagKind::secrecy) throw UsageError("'" + name + "' is not a secrecy tag");
    secrecy.insert(*tag);
  }
  auto visible = audit::auditor_view(log.events, SecurityContext(secrecy, Label(TagKind::integrity)));
  std::string text = audit::format_edge_list(visible, log.tags);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(log_path(o.out), text);
  }
  std::cerr << visible.size() << " of " << log.events.size() << " entries visible\n";
  return kOk;
}

struct ExportOptions {
  std::string log;
  std::string format = "dot";
  std::string granularity = "full";
  std::string out;
};

int cmd_export(const ExportOptions& o) {
  auto log = load_log(o.log);
  auto graph = audit::build_graph(log.events, audit::parse_granularity(o.granularity));
  auto format = o.format == "dot" ? audit::ExportFormat::dot : audit::ExportFormat::edge_list;
  std::string text = audit::export_graph(graph, format, log.tags);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_file(log_path(o.out), text);
  }
  return kOk;
}

// -- misc ----------------------------------------------------------------------

int cmd_bench(const std::string& workload_name, std::size_t labels, std::size_t iterations) {
  scenario::Workload workload;
  try {
    workload = scenario::parse_workload(workload_name);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (iterations == 0) iterations = scenario::default_iterations(workload);
  std::vector<std::size_t> sizes{0};
  if (labels != 0) sizes.push_back(labels);
  std::cout << scenario::format_report(scenario::run_bench(workload, sizes, iterations));
  return kOk;
}

int cmd_fmt(const std::string& file) {
  try {
    std::cout << scenario::print(scenario::parse(read_file(file)));
  } catch (const scenario::ParseError& e) {
    std::cerr << file << ":" << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

int cmd_fixture(const std::string& out, const std::string& graph) {
  auto trace = scenario::declassification_trace();
  std::string text = audit::format_edge_list(trace.events, trace.tags);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(log_path(out), text);
  }
  if (!graph.empty()) {
    write_file(log_path(graph),
               audit::export_graph(audit::build_graph(trace.events), audit::ExportFormat::dot,
                                   trace.tags));
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camflow: information flow control simulator and audit toolkit"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Execute a scenario file");
  run_cmd->add_option("file", run.file, "Scenario file")->required();
  run_cmd->add_option("--log", run.log, "Write the audit log (edge-list format)");
  run_cmd->add_option("--graph", run.graph, "Write the flow graph as DOT");
  run_cmd->add_option("--granularity", run.granularity,
                      "Comma list of full, no-metadata, context-changes, labelled-only, with-denied");
  run_cmd->add_flag("-q,--quiet", run.quiet, "Only print the report on failure");

  auto* audit_cmd = app.add_subcommand("audit", "Query an audit log");
  audit_cmd->require_subcommand(1);

  QueryOptions query;
  auto* query_cmd = audit_cmd->add_subcommand("query", "Disclosure paths and compliance checks");
  query_cmd->add_option("--log", query.log, "Audit log")->required();
  query_cmd->add_option("--from", query.from, "Source node predicate")->required();
  query_cmd->add_option("--to", query.to, "Destination node predicate")->required();
  query_cmd->add_option("--waypoint", query.waypoints,
                        "Node predicate every path must pass (repeatable)");
  query_cmd->add_option("--granularity", query.granularity, "Graph granularity");
  query_cmd->add_flag("--with-denied", query.with_denied, "Include denied flows");
  query_cmd->add_flag("--with-delegation", query.with_delegation,
                      "Include privilege delegation edges");
  query_cmd->add_option("--max-nodes", query.max_nodes, "Longest simple path explored");

  ViewOptions view;
  auto* view_cmd = audit_cmd->add_subcommand("view", "Entries visible to an auditor");
  view_cmd->add_option("--log", view.log, "Audit log")->required();
  view_cmd->add_option("--auditor-s", view.auditor_s, "Auditor secrecy tags, comma separated")
      ->required();
  view_cmd->add_option("--out", view.out, "Write the filtered log here");

  ExportOptions exp;
  auto* export_cmd = audit_cmd->add_subcommand("export", "Render the flow graph");
  export_cmd->add_option("--log", exp.log, "Audit log")->required();
  export_cmd->add_option("--format", exp.format, "dot or edge-list")
      ->check(CLI::IsMember({"dot", "edge-list"}));
  export_cmd->add_option("--granularity", exp.granularity, "Graph granularity");
  export_cmd->add_option("--out", exp.out, "Output file");

  std::string workload;
  std::size_t labels = 0;
  std::size_t iterations = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Latency micro-benchmarks");
  bench_cmd->add_option("workload", workload, "flow-check, pipe-roundtrip or message-strip")
      ->required();
  bench_cmd->add_option("--labels", labels, "Tags per label (an unlabelled run is always added)");
  bench_cmd->add_option("--iterations", iterations, "Operations per label size");

  std::string fmt_file;
  auto* fmt_cmd = app.add_subcommand("fmt", "Print a scenario in canonical form");
  fmt_cmd->add_option("file", fmt_file, "Scenario file")->required();

  std::string fixture_log, fixture_graph;
  auto* fixture_cmd =
      app.add_subcommand("fixture", "Emit the built-in declassification trace");
  fixture_cmd->add_option("--log", fixture_log, "Write the log here instead of stdout");
  fixture_cmd->add_option("--graph", fixture_graph, "Also write the DOT graph");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*query_cmd) return cmd_query(query);
    if (*view_cmd) return cmd_view(view);
    if (*export_cmd) return cmd_export(exp);
    if (*bench_cmd) return cmd_bench(workload, labels, iterations);
    if (*fmt_cmd) return cmd_fmt(fmt_file);
    if (*fixture_cmd) return cmd_fixture(fixture_log, fixture_graph);
  } catch (const UsageError& e) {
    std::cerr << "camflow: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "camflow: " << e.what() << "\n";
    return e.code() == Errc::invalid_argument ? kUsage : kFailed;
  }
  return kUsage;
}
