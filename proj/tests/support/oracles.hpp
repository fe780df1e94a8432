#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of these call into the library's decision code.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "camflow/audit/graph.hpp"
#include "camflow/audit/query.hpp"
#include "camflow/ifc.hpp"

namespace oracle {

using camflow::ConflictSet;
using camflow::EntityState;
using camflow::SecurityContext;
using camflow::Tag;
using camflow::TagKind;

inline std::set<std::uint64_t> ids(const camflow::TagSet& s) {
  std::set<std::uint64_t> out;
  for (const auto& t : s) out.insert(t.id);
  return out;
}

inline bool subset(const std::set<std::uint64_t>& a, const std::set<std::uint64_t>& b) {
  for (auto x : a) {
    if (!b.count(x)) return false;
  }
  return true;
}

/// Double-subset rule evaluated element by element.
inline bool flow(const SecurityContext& src, const SecurityContext& dst) {
  return subset(ids(src.secrecy), ids(dst.secrecy)) &&
         subset(ids(dst.integrity), ids(src.integrity));
}

/// |(S ∪ I ∪ P+S ∪ P-S ∪ P+I ∪ P-I) ∩ C| <= 1
inline bool coi(const EntityState& e, const std::vector<std::uint64_t>& conflict) {
  std::set<std::uint64_t> touched;
  for (const auto* s : {&e.context.secrecy, &e.context.integrity, &e.privileges.add_secrecy,
                        &e.privileges.remove_secrecy, &e.privileges.add_integrity,
                        &e.privileges.remove_integrity}) {
    for (const auto& t : *s) touched.insert(t.id);
  }
  std::set<std::uint64_t> c(conflict.begin(), conflict.end());
  std::size_t n = 0;
  for (auto x : touched) n += c.count(x);
  return n <= 1;
}

/// Tag ids 1..n_s are secrecy, n_s+1..n_s+n_i integrity.
inline SecurityContext context_from_masks(unsigned s_mask, unsigned i_mask, unsigned n_s) {
  SecurityContext ctx;
  for (unsigned b = 0; b < 32; ++b) {
    if (s_mask & (1u << b)) ctx.secrecy.insert(Tag{b + 1, TagKind::secrecy});
    if (i_mask & (1u << b)) ctx.integrity.insert(Tag{n_s + b + 1, TagKind::integrity});
  }
  return ctx;
}

inline camflow::TagSet random_set(std::mt19937_64& rng, TagKind kind,
                                  const std::vector<std::uint64_t>& universe, double p = 0.3) {
  std::bernoulli_distribution pick(p);
  camflow::TagSet s(kind);
  for (auto id : universe) {
    if (pick(rng)) s.insert(Tag{id, kind});
  }
  return s;
}

/// Auditor visibility by direct set arithmetic on the two secrecy labels.
inline bool auditor_sees(const SecurityContext& origin, const SecurityContext& dest,
                         const SecurityContext& auditor) {
  auto u = ids(origin.secrecy);
  auto d = ids(dest.secrecy);
  u.insert(d.begin(), d.end());
  return subset(u, ids(auditor.secrecy));
}

struct OraclePath {
  std::vector<std::size_t> nodes;
  std::vector<std::uint64_t> event_ids;
  bool operator<(const OraclePath& o) const {
    return std::tie(event_ids, nodes) < std::tie(o.event_ids, o.nodes);
  }
  bool operator==(const OraclePath& o) const {
    return nodes == o.nodes && event_ids == o.event_ids;
  }
};

/// Enumerates every simple forward path of at least one edge, then keeps the
/// ones whose ids strictly increase and whose endpoints match. Denied and
/// delegation edges never carry data.
inline std::vector<OraclePath> all_disclosure_paths(
    const camflow::audit::FlowGraph& g,
    const std::function<bool(const camflow::audit::GraphNode&)>& from,
    const std::function<bool(const camflow::audit::GraphNode&)>& to) {
  using camflow::audit::EventKind;
  std::vector<OraclePath> raw;
  const auto& nodes = g.nodes();
  const auto& edges = g.edges();
  std::vector<std::size_t> path_nodes;
  std::vector<std::uint64_t> path_ids;
  std::vector<char> seen(nodes.size(), 0);
  std::function<void(std::size_t)> walk = [&](std::size_t n) {
    for (const auto& e : edges) {
      if (e.from != n) continue;
      if (!e.event.allowed || e.event.kind == EventKind::privilege_delegation) continue;
      if (seen[e.to]) continue;
      seen[e.to] = 1;
      path_nodes.push_back(e.to);
      path_ids.push_back(e.event.id);
      raw.push_back({path_nodes, path_ids});
      walk(e.to);
      path_ids.pop_back();
      path_nodes.pop_back();
      seen[e.to] = 0;
    }
  };
  for (std::size_t s = 0; s < nodes.size(); ++s) {
    path_nodes = {s};
    seen[s] = 1;
    walk(s);
    seen[s] = 0;
  }
  std::vector<OraclePath> out;
  for (auto& p : raw) {
    if (!from(nodes[p.nodes.front()]) || !to(nodes[p.nodes.back()])) continue;
    if (!std::is_sorted(p.event_ids.begin(), p.event_ids.end())) continue;
    if (std::adjacent_find(p.event_ids.begin(), p.event_ids.end()) != p.event_ids.end()) continue;
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<OraclePath> as_oracle_paths(const camflow::audit::PathQueryResult& r) {
  std::vector<OraclePath> out;
  for (const auto& p : r.paths) out.push_back({p.nodes, p.event_ids});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace oracle
