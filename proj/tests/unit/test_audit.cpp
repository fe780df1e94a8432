#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "camflow/audit/export.hpp"
#include "camflow/audit/graph.hpp"
#include "camflow/audit/log.hpp"
#include "camflow/audit/query.hpp"
#include "camflow/error.hpp"
#include "camflow/scenario/fixtures.hpp"
#include "camflow/sim/kernel.hpp"
#include "support/oracles.hpp"
#include "support/random_runs.hpp"

using namespace camflow;
using namespace camflow::audit;

namespace {

SecurityContext ctx(std::initializer_list<Tag> s, std::initializer_list<Tag> i = {}) {
  return SecurityContext(Label(TagKind::secrecy, s), Label(TagKind::integrity, i));
}

Tag sec(std::uint64_t id) { return Tag{id, TagKind::secrecy}; }

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

AuditEvent edge(EventId id, EntityId from, SecurityContext fc, EntityId to, SecurityContext tc,
                EventKind kind = EventKind::data_flow, bool allowed = true) {
  AuditEvent e;
  e.id = id;
  e.kind = kind;
  e.allowed = allowed;
  e.source = {std::move(from), std::move(fc)};
  e.target = {std::move(to), std::move(tc)};
  return e;
}

TagResolver no_tags() {
  return [](std::string_view) -> std::optional<Tag> { return std::nullopt; };
}

}  // namespace

TEST_CASE("record assigns consecutive ids from 1") {
  AuditLog log;
  CHECK(log.last_id() == 0);
  AuditEvent draft;
  draft.id = 77;
  CHECK(log.record(draft) == 1);
  CHECK(log.record(draft) == 2);
  CHECK(log.snapshot().front().id == 1);

  NamingAuthority authority;
  AuditLog shared;
  sim::Kernel kernel(authority, shared);
  kernel.add_machine("a");
  kernel.add_machine("b");
  sim::BootSpec spec;
  auto pa = kernel.boot_process("a", spec);
  auto fa = kernel.boot_object("a", sim::EntityClass::file, spec);
  auto pb = kernel.boot_process("b", spec);
  auto fb = kernel.boot_object("b", sim::EntityClass::file, spec);
  kernel.write(pa, fa, "1");
  kernel.write(pb, fb, "2");
  auto events = shared.snapshot();
  REQUIRE(events.size() == 2);
  CHECK(events[0].id < events[1].id);
  CHECK(events[0].meta("machine") == "a");
  CHECK(events[1].meta("machine") == "b");
}

TEST_CASE("a denied write keeps both context snapshots") {
  NamingAuthority authority;
  AuditLog log;
  sim::Kernel kernel(authority, log);
  kernel.add_machine("m");
  Tag s = authority.declare(TagKind::secrecy, "s");
  Tag t = authority.declare(TagKind::secrecy, "t");
  sim::BootSpec ps;
  ps.context = ctx({s});
  ps.privileges.add_secrecy.insert(t);
  auto p = kernel.boot_process("m", ps);
  auto f = kernel.boot_object("m", sim::EntityClass::file, {});
  kernel.write(p, f, "x");
  kernel.change_label(p, t, LabelOp::add, TagKind::secrecy);
  auto e = log.snapshot().front();
  CHECK_FALSE(e.allowed);
  CHECK(e.reason == "secrecy");
  CHECK(e.source.context == ctx({s}));
  CHECK(e.target.context == ctx({}));
}

TEST_CASE("log file golden and round trip") {
  NamingAuthority authority;
  AuditLog log;
  sim::Kernel kernel(authority, log);
  kernel.add_machine("m");
  Tag s = authority.declare(TagKind::secrecy, "s");
  Tag i = authority.declare(TagKind::integrity, "i");
  sim::BootSpec p;
  p.name = "p";
  p.role = "writer";
  p.context = ctx({s}, {i});
  sim::BootSpec f;
  f.name = "f\tx";
  f.payload = "abc";
  sim::BootSpec q;
  q.name = "q";
  q.context = ctx({s});
  auto pid = kernel.boot_process("m", p);
  auto fid = kernel.boot_object("m", sim::EntityClass::file, f);
  auto qid = kernel.boot_process("m", q);
  kernel.write(pid, fid, "x");
  kernel.read(qid, fid);
  kernel.spawn(pid, false, "child");

  auto text = format_edge_list(log.snapshot(), authority.all_tags());
  CHECK(text == slurp(std::string(CAMFLOW_GOLDEN_DIR) + "/small-run.tsv"));

  auto parsed = parse_edge_list(text);
  CHECK(parsed.events == log.snapshot());
  REQUIRE(parsed.tags.size() == 2);
  CHECK(parsed.tags[0].name == "s");
  CHECK(parsed.tags[1].tag.kind == TagKind::integrity);
  CHECK(format_edge_list(parsed.events, parsed.tags) == text);
}

TEST_CASE("malformed log lines name their line number") {
  auto expect_line = [](const std::string& text, const std::string& line) {
    try {
      parse_edge_list(text);
      FAIL("expected malformed_record");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::malformed_record);
      CHECK(std::string(e.what()).find("line " + line) != std::string::npos);
    }
  };
  expect_line("1\tdata-flow\tallow\tm:1\t-\t-\tm:2\t-\t-\n", "1");
  expect_line("# x\n1\tbogus\tallow\tm:1\t-\t-\tm:2\t-\t-\t0\n", "2");
  expect_line("1\tdata-flow\tmaybe\tm:1\t-\t-\tm:2\t-\t-\t0\n", "1");
  expect_line("2\tdata-flow\tallow\tm:1\t-\t-\tm:2\t-\t-\t0\n1\tdata-flow\tallow\tm:1\t-\t-\tm:2\t-\t-\t0\n",
              "2");
  expect_line("1\tdata-flow\tallow\tm:1\tx\t-\tm:2\t-\t-\t0\n", "1");
  expect_line("1\tdata-flow\tallow\tm:1\t-\t-\tm:2\t-\t-\t0\tnoequals\n", "1");
  CHECK(parse_edge_list("").events.empty());
}

TEST_CASE("graph construction") {
  CHECK(build_graph({}).nodes().empty());

  auto fixture = scenario::declassification_trace();
  auto g = build_graph(fixture.events);
  CHECK(g.nodes().size() == 6);
  CHECK(g.edges().size() == 6);
  const EntityId p1{"host", 1};
  CHECK(g.nodes_of(p1).size() == 2);
  auto hi = g.find_node(p1, ctx({sec(1)}));
  auto lo = g.find_node(p1, ctx({}));
  REQUIRE(hi);
  REQUIRE(lo);
  // Hand-built expectation: the declassification edge joins P1's two nodes.
  bool found = false;
  for (const auto& e : g.edges()) {
    if (e.from == *hi && e.to == *lo) {
      found = true;
      CHECK(e.event.kind == EventKind::context_change);
      CHECK(e.event.id == 4);
    }
  }
  CHECK(found);
  for (const auto& e : g.edges()) {
    CHECK(e.from < g.nodes().size());
    CHECK(e.to < g.nodes().size());
  }

  auto out_of_order = fixture.events;
  std::swap(out_of_order[0], out_of_order[1]);
  CHECK(error_of([&] { build_graph(out_of_order); }) == Errc::malformed_record);
}

TEST_CASE("granularity filters") {
  auto fixture = scenario::declassification_trace();
  auto only = parse_granularity("context-changes");
  auto g = build_graph(fixture.events, only);
  std::size_t changes = 0;
  for (const auto& e : fixture.events) changes += e.kind == EventKind::context_change;
  CHECK(g.edges().size() == changes);

  auto bare = build_graph(fixture.events, parse_granularity("no-metadata"));
  for (const auto& e : bare.edges()) CHECK(e.event.metadata.empty());

  auto labelled = filter_events(fixture.events, parse_granularity("labelled-only"));
  for (const auto& e : labelled) {
    CHECK_FALSE(e.source.context.unlabelled());
    CHECK_FALSE(e.target.context.unlabelled());
  }
  CHECK(labelled.size() == 1);

  GranularityConfig target;
  target.target_context = ctx({sec(1)});
  CHECK(filter_events(fixture.events, target).size() == 2);

  auto events = fixture.events;
  events.push_back(edge(7, {"host", 3}, ctx({}), {"host", 2}, ctx({}), EventKind::data_flow, false));
  CHECK(build_graph(events).edges().size() == 6);
  CHECK(build_graph(events, parse_granularity("full,with-denied")).edges().size() == 7);
  CHECK(error_of([] { parse_granularity("sometimes"); }) == Errc::invalid_argument);
}

TEST_CASE("declassification fixture query") {
  auto fixture = scenario::declassification_trace();
  auto g = build_graph(fixture.events);
  auto resolve = [&](std::string_view name) -> std::optional<Tag> {
    for (const auto& t : fixture.tags) {
      if (t.name == name) return t.tag;
    }
    return std::nullopt;
  };
  auto result = find_disclosure_paths(g, parse_node_predicate("name=F2", resolve),
                                      parse_node_predicate("name=P2", resolve));
  REQUIRE(result.paths.size() == 1);
  CHECK(result.paths[0].event_ids == std::vector<EventId>{3, 4, 6});
  std::vector<std::string> names;
  for (auto n : result.paths[0].nodes) names.push_back(g.display_name(n));
  CHECK(names == std::vector<std::string>{"F2", "P1", "P1", "P2"});

  // Every high context also matches P1 before it declassifies.
  auto high = find_disclosure_paths(g, parse_node_predicate("S>=[high]", resolve),
                                    parse_node_predicate("name=P2", resolve));
  REQUIRE(high.paths.size() == 2);
  CHECK(high.paths[0].event_ids == std::vector<EventId>{3, 4, 6});
  CHECK(high.paths[1].event_ids == std::vector<EventId>{4, 6});

  // F1 -> P3 -> P2 (events 1, 2) predates P1's write to F1 (event 5).
  auto via_f1 = find_disclosure_paths(g, parse_node_predicate("name=P1", resolve),
                                      parse_node_predicate("name=P3", resolve));
  CHECK(via_f1.paths.empty());
}

TEST_CASE("single edge query") {
  std::vector<AuditEvent> events{edge(1, {"m", 1}, ctx({sec(1)}), {"m", 2}, ctx({sec(1)}))};
  auto g = build_graph(events);
  auto r = find_disclosure_paths(g, parse_node_predicate("entity=m:1", no_tags()),
                                 parse_node_predicate("entity=m:2", no_tags()));
  REQUIRE(r.paths.size() == 1);
  CHECK(r.paths[0].edges.size() == 1);
  CHECK(r.complete());
}

TEST_CASE("path search agrees with exhaustive enumeration on random small graphs") {
  std::mt19937_64 rng(21);
  std::size_t graphs = 0;
  for (int n = 0; n < 400; ++n) {
    const std::size_t entities = 2 + rng() % 5;
    const std::size_t count = 1 + rng() % 18;
    std::vector<AuditEvent> events;
    for (std::size_t k = 0; k < count; ++k) {
      EntityId a{"m", rng() % entities}, b{"m", rng() % entities};
      auto ca = oracle::context_from_masks(rng() % 2, 0, 1);
      auto cb = oracle::context_from_masks(rng() % 2, 0, 1);
      EventKind kind = rng() % 6 == 0 ? EventKind::privilege_delegation : EventKind::data_flow;
      events.push_back(edge(k + 1, a, ca, b, cb, kind, rng() % 8 != 0));
    }
    auto g = build_graph(events, parse_granularity("with-denied"));
    if (g.nodes().size() > 10) continue;
    ++graphs;
    auto any = [](const GraphNode&) { return true; };
    auto secret = [](const GraphNode& node) { return !node.context.secrecy.empty(); };
    auto pub = [](const GraphNode& node) { return node.context.secrecy.empty(); };
    CHECK(oracle::as_oracle_paths(find_disclosure_paths(g, any, any)) ==
          oracle::all_disclosure_paths(g, any, any));
    CHECK(oracle::as_oracle_paths(find_disclosure_paths(g, secret, pub)) ==
          oracle::all_disclosure_paths(g, secret, pub));
  }
  CHECK(graphs > 100);
}

TEST_CASE("path caps are reported") {
  std::vector<AuditEvent> events;
  for (std::uint64_t k = 1; k <= 6; ++k) {
    events.push_back(edge(k, {"m", k}, ctx({}), {"m", k + 1}, ctx({})));
  }
  auto g = build_graph(events);
  auto any = [](const GraphNode&) { return true; };
  PathQueryOptions small;
  small.max_nodes = 3;
  auto r = find_disclosure_paths(g, any, any, small);
  CHECK(r.node_cap_hit);
  CHECK_FALSE(r.complete());
  for (const auto& p : r.paths) CHECK(p.nodes.size() <= 3);
  PathQueryOptions few;
  few.max_paths = 2;
  auto r2 = find_disclosure_paths(g, any, any, few);
  CHECK(r2.path_cap_hit);
  CHECK(r2.paths.size() == 2);
}

TEST_CASE("node predicates") {
  auto resolve = [](std::string_view name) -> std::optional<Tag> {
    if (name == "a") return sec(1);
    if (name == "b") return sec(2);
    return std::nullopt;
  };
  GraphNode n{{"m", 3}, ctx({sec(1), sec(2)}), "proc", "worker"};
  CHECK(parse_node_predicate("S=[a,b]", resolve)(n));
  CHECK(parse_node_predicate("S>=[a]", resolve)(n));
  CHECK_FALSE(parse_node_predicate("S<=[a]", resolve)(n));
  CHECK(parse_node_predicate("S<=[#1,#2]", resolve)(n));
  CHECK(parse_node_predicate("I=[]", resolve)(n));
  CHECK(parse_node_predicate("name=proc role=worker entity=m:3", resolve)(n));
  CHECK(parse_node_predicate("!role=db", resolve)(n));
  CHECK(parse_node_predicate("any", resolve)(n));
  CHECK(error_of([&] { parse_node_predicate("S=[zzz]", resolve); }) == Errc::invalid_argument);
  CHECK(error_of([&] { parse_node_predicate("colour=red", resolve); }) == Errc::invalid_argument);
  CHECK(error_of([&] { parse_node_predicate("", resolve); }) == Errc::invalid_argument);
}

TEST_CASE("compliance rules") {
  // eu data -> consent check -> anonymiser -> us sink; a later route skips consent.
  const Tag eu = sec(1);
  const EntityId src{"m", 1}, cc{"m", 2}, anon{"m", 3}, sink{"m", 4};
  std::vector<AuditEvent> events{
      edge(1, src, ctx({eu}), cc, ctx({eu})),
      edge(2, cc, ctx({eu}), anon, ctx({eu})),
      edge(3, anon, ctx({eu}), anon, ctx({}), EventKind::context_change),
      edge(4, anon, ctx({}), sink, ctx({})),
  };
  auto role_of = [&](const EntityId& id) -> std::string {
    if (id == cc) return "consent-checker";
    if (id == anon) return "anonymiser";
    return "";
  };
  auto pred_role = [&](std::string role) {
    return NodePredicate([&, role](const GraphNode& n) { return role_of(n.entity) == role; });
  };
  ComplianceRule rule{
      [&](const GraphNode& n) { return n.entity == src && n.context.secrecy.contains(eu); },
      [&](const GraphNode& n) { return n.entity == sink; },
      {pred_role("anonymiser")}};
  auto g = build_graph(events);
  CHECK(check_compliance(g, rule).compliant);

  rule.waypoints.push_back(pred_role("consent-checker"));
  CHECK(check_compliance(g, rule).compliant);

  events.push_back(edge(5, src, ctx({eu}), anon, ctx({eu})));
  events.push_back(edge(6, anon, ctx({eu}), anon, ctx({}), EventKind::context_change));
  events.push_back(edge(7, anon, ctx({}), sink, ctx({})));
  auto g2 = build_graph(events);
  auto verdict = check_compliance(g2, rule);
  CHECK_FALSE(verdict.compliant);
  REQUIRE_FALSE(verdict.counterexamples.empty());
  for (const auto& p : verdict.counterexamples) {
    for (auto node : p.nodes) CHECK(g2.nodes()[node].entity != cc);
  }

  CHECK(check_compliance(build_graph({}), rule).compliant);
}

TEST_CASE("auditor visibility") {
  const Tag a = sec(1), b = sec(2);
  auto e = edge(1, {"m", 1}, ctx({a}), {"m", 2}, ctx({a, b}));
  CHECK(auditor_may_see(e, Label(TagKind::secrecy, {a, b})));
  CHECK_FALSE(auditor_may_see(e, Label(TagKind::secrecy, {a})));
  auto integrity_only = edge(2, {"m", 1}, ctx({}, {Tag{9, TagKind::integrity}}), {"m", 2}, ctx({}));
  CHECK(auditor_may_see(integrity_only, Label(TagKind::secrecy)));

  std::vector<AuditEvent> events{e, integrity_only};
  CHECK(auditor_view(events, ctx({a, b, sec(3)})).size() == 2);
  CHECK(auditor_view(events, ctx({})).size() == 1);

  std::mt19937_64 rng(22);
  for (int n = 0; n < 2000; ++n) {
    auto o = SecurityContext(oracle::random_set(rng, TagKind::secrecy, {1, 2, 3}), Label(TagKind::integrity));
    auto d = SecurityContext(oracle::random_set(rng, TagKind::secrecy, {1, 2, 3}), Label(TagKind::integrity));
    auto auditor = SecurityContext(oracle::random_set(rng, TagKind::secrecy, {1, 2, 3}, 0.6),
                                   Label(TagKind::integrity));
    auto ev = edge(1, {"m", 1}, o, {"m", 2}, d);
    CHECK(auditor_may_see(ev, auditor.secrecy) == oracle::auditor_sees(o, d, auditor));
    auto wider = auditor;
    wider.secrecy.insert(sec(1 + rng() % 3));
    if (auditor_may_see(ev, auditor.secrecy)) CHECK(auditor_may_see(ev, wider.secrecy));
  }
}

TEST_CASE("exports are deterministic and round trip") {
  auto fixture = scenario::declassification_trace();
  auto g = build_graph(fixture.events);
  auto dot = export_graph(g, ExportFormat::dot, fixture.tags);
  std::regex node_line(R"(^  n\d+ \[label=)");
  std::size_t nodes = 0;
  std::istringstream lines(dot);
  for (std::string line; std::getline(lines, line);) nodes += std::regex_search(line, node_line);
  CHECK(nodes == 6);
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("S={high}") != std::string::npos);
  CHECK(export_graph(build_graph(fixture.events), ExportFormat::dot, fixture.tags) == dot);

  auto edges = export_graph(g, ExportFormat::edge_list, fixture.tags);
  auto back = parse_edge_list(edges);
  CHECK(build_graph(back.events) == g);

  auto empty_dot = export_graph(FlowGraph{}, ExportFormat::dot);
  CHECK(empty_dot.find("->") == std::string::npos);
  auto empty_list = export_graph(FlowGraph{}, ExportFormat::edge_list);
  CHECK(parse_edge_list(empty_list).events.empty());
  CHECK_FALSE(empty_list.empty());

  auto dir = std::filesystem::temp_directory_path() / "camflow-test-export";
  std::filesystem::create_directories(dir);
  export_graph(dir / "g.dot", g, ExportFormat::dot, fixture.tags);
  CHECK(slurp((dir / "g.dot").string()) == dot);
  CHECK(error_of([&] { export_graph(dir / "missing" / "g.dot", g, ExportFormat::dot); }) ==
        Errc::io_error);
  std::filesystem::remove_all(dir);

  CHECK(format_context(ctx({sec(1)}), fixture.tags) == "[S={high} I={}]");
  CHECK(format_context(ctx({sec(5)})) == "[S={#5} I={}]");
}

TEST_CASE("random runs export and re-ingest to the same graph") {
  std::mt19937_64 rng(23);
  for (int n = 0; n < 100; ++n) {
    auto run = runs::random_run(rng, {true, 10, 20});
    auto events = run.log->snapshot();
    auto text = format_edge_list(events, run.authority->all_tags());
    auto parsed = parse_edge_list(text);
    CHECK(parsed.events == events);
    CHECK(build_graph(parsed.events) == build_graph(events));
    auto g = build_graph(events);
    CHECK(export_graph(g, ExportFormat::dot) == export_graph(build_graph(events), ExportFormat::dot));
  }
}
