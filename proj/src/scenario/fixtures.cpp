#include "camflow/scenario/fixtures.hpp"

#include <map>

namespace camflow::scenario {

audit::LogFile declassification_trace() {
  const Tag high{1, TagKind::secrecy};
  const SecurityContext hi(Label(TagKind::secrecy, {high}), Label(TagKind::integrity));
  const SecurityContext lo;

  const std::map<std::string, EntityId> ids{
      {"P1", {"host", 1}}, {"P2", {"host", 2}}, {"P3", {"host", 3}},
      {"F1", {"host", 4}}, {"F2", {"host", 5}},
  };

  audit::LogFile file;
  file.tags.push_back(TagInfo{high, "high", false});

  auto event = [&](audit::EventKind kind, const std::string& src, const SecurityContext& sctx,
                   const std::string& dst, const SecurityContext& dctx, const std::string& op) {
    audit::AuditEvent e;
    e.id = file.events.size() + 1;
    e.kind = kind;
    e.source = {ids.at(src), sctx};
    e.target = {ids.at(dst), dctx};
    e.metadata = {{"op", op}, {"machine", "host"}, {"src_name", src}, {"dst_name", dst}};
    file.events.push_back(std::move(e));
  };

  using audit::EventKind;
  event(EventKind::data_flow, "F1", lo, "P3", lo, "read");
  event(EventKind::data_flow, "P3", lo, "P2", lo, "deliver");
  event(EventKind::data_flow, "F2", hi, "P1", hi, "read");
  event(EventKind::context_change, "P1", hi, "P1", lo, "change-label");
  event(EventKind::data_flow, "P1", lo, "F1", lo, "write");
  event(EventKind::data_flow, "P1", lo, "P2", lo, "deliver");
  file.events[3].metadata.emplace_back("label_op", "remove");
  file.events[3].metadata.emplace_back("tag", "1");
  return file;
}

}  // namespace camflow::scenario
