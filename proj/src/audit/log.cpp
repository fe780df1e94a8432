#include "camflow/audit/log.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "camflow/error.hpp"

namespace camflow::audit {

namespace {

constexpr std::string_view kMagic = "# camflow audit log v1";
constexpr std::string_view kColumns =
    "# event-id\tkind\tdecision\tsource\tsource-S\tsource-I\ttarget\ttarget-S\ttarget-I\t"
    "via-trusted\tmetadata...";

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

[[noreturn]] void malformed(std::size_t line, const std::string& why) {
  throw Error(Errc::malformed_record, "line " + std::to_string(line) + ": " + why);
}

std::string unescape(std::string_view s, std::size_t line) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) malformed(line, "dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: malformed(line, std::string("bad escape \\") + s[i]);
    }
  }
  return out;
}

void write_tags(std::ostream& out, const Label& label) {
  if (label.empty()) {
    out << '-';
    return;
  }
  bool first = true;
  for (const auto& t : label) {
    if (!first) out << ',';
    out << t.id;
    first = false;
  }
}

std::uint64_t parse_u64(std::string_view s, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    malformed(line, std::string("bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

Label parse_tags(std::string_view s, TagKind kind, std::size_t line) {
  Label label(kind);
  if (s == "-") return label;
  while (!s.empty()) {
    auto comma = s.find(',');
    auto item = s.substr(0, comma);
    label.insert(Tag{parse_u64(item, line, "tag id"), kind});
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return label;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  while (true) {
    auto tab = line.find('\t');
    fields.push_back(line.substr(0, tab));
    if (tab == std::string_view::npos) break;
    line.remove_prefix(tab + 1);
  }
  return fields;
}

EntityId parse_entity(std::string_view s, std::size_t line) {
  try {
    return parse_entity_id(unescape(s, line));
  } catch (const Error& e) {
    malformed(line, e.what());
  }
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::data_flow: return "data-flow";
    case EventKind::creation_flow: return "creation-flow";
    case EventKind::context_change: return "context-change";
    case EventKind::privilege_delegation: return "privilege-delegation";
  }
  return "unknown";
}

EventKind parse_event_kind(std::string_view text) {
  for (auto k : {EventKind::data_flow, EventKind::creation_flow, EventKind::context_change,
                 EventKind::privilege_delegation}) {
    if (to_string(k) == text) return k;
  }
  throw Error(Errc::malformed_record, "unknown event kind '" + std::string(text) + "'");
}

std::string_view AuditEvent::meta(std::string_view key) const noexcept {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

EventId AuditLog::record(AuditEvent draft) {
  std::lock_guard lock(mu_);
  draft.id = events_.empty() ? 1 : events_.back().id + 1;
  events_.push_back(std::move(draft));
  return events_.back().id;
}

std::vector<AuditEvent> AuditLog::snapshot() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::size_t AuditLog::size() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

EventId AuditLog::last_id() const {
  std::lock_guard lock(mu_);
  return events_.empty() ? 0 : events_.back().id;
}

void write_edge_list(std::ostream& out, std::span<const AuditEvent> events,
                     std::span<const TagInfo> tags) {
  out << kMagic << '\n';
  for (const auto& t : tags) {
    out << "#tag\t" << t.tag.id << '\t' << to_string(t.tag.kind) << '\t' << escape(t.name)
        << '\n';
  }
  out << kColumns << '\n';
  for (const auto& e : events) {
    out << e.id << '\t' << to_string(e.kind) << '\t';
    if (e.allowed) {
      out << "allow";
    } else {
      out << "deny";
      if (!e.reason.empty()) out << ':' << escape(e.reason);
    }
    out << '\t' << escape(to_string(e.source.entity)) << '\t';
    write_tags(out, e.source.context.secrecy);
    out << '\t';
    write_tags(out, e.source.context.integrity);
    out << '\t' << escape(to_string(e.target.entity)) << '\t';
    write_tags(out, e.target.context.secrecy);
    out << '\t';
    write_tags(out, e.target.context.integrity);
    out << '\t' << (e.via_trusted ? 1 : 0);
    for (const auto& [k, v] : e.metadata) out << '\t' << escape(k) << '=' << escape(v);
    out << '\n';
  }
}

std::string format_edge_list(std::span<const AuditEvent> events, std::span<const TagInfo> tags) {
  std::ostringstream os;
  write_edge_list(os, events, tags);
  return os.str();
}

LogFile read_edge_list(std::istream& in) {
  LogFile file;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.starts_with("#tag\t")) {
      auto f = split_tabs(line.substr(5));
      if (f.size() != 3) malformed(line_no, "tag declaration needs 3 fields");
      TagInfo info;
      info.tag.id = parse_u64(f[0], line_no, "tag id");
      if (f[1] == "secrecy") {
        info.tag.kind = TagKind::secrecy;
      } else if (f[1] == "integrity") {
        info.tag.kind = TagKind::integrity;
      } else {
        malformed(line_no, "bad tag kind '" + std::string(f[1]) + "'");
      }
      info.name = unescape(f[2], line_no);
      file.tags.push_back(std::move(info));
      continue;
    }
    if (line.front() == '#') continue;

    auto f = split_tabs(line);
    if (f.size() < 10) malformed(line_no, "expected at least 10 fields, got " + std::to_string(f.size()));
    AuditEvent e;
    e.id = parse_u64(f[0], line_no, "event id");
    try {
      e.kind = parse_event_kind(f[1]);
    } catch (const Error&) {
      malformed(line_no, "bad event kind '" + std::string(f[1]) + "'");
    }
    if (f[2] == "allow") {
      e.allowed = true;
    } else if (f[2] == "deny" || f[2].starts_with("deny:")) {
      e.allowed = false;
      if (f[2].size() > 5) e.reason = unescape(f[2].substr(5), line_no);
    } else {
      malformed(line_no, "bad decision '" + std::string(f[2]) + "'");
    }
    e.source.entity = parse_entity(f[3], line_no);
    e.source.context.secrecy = parse_tags(f[4], TagKind::secrecy, line_no);
    e.source.context.integrity = parse_tags(f[5], TagKind::integrity, line_no);
    e.target.entity = parse_entity(f[6], line_no);
    e.target.context.secrecy = parse_tags(f[7], TagKind::secrecy, line_no);
    e.target.context.integrity = parse_tags(f[8], TagKind::integrity, line_no);
    if (f[9] != "0" && f[9] != "1") malformed(line_no, "bad via-trusted flag");
    e.via_trusted = f[9] == "1";
    for (std::size_t i = 10; i < f.size(); ++i) {
      auto eq = f[i].find('=');
      if (eq == std::string_view::npos) malformed(line_no, "metadata without '='");
      e.metadata.emplace_back(unescape(f[i].substr(0, eq), line_no),
                              unescape(f[i].substr(eq + 1), line_no));
    }
    if (!file.events.empty() && e.id <= file.events.back().id) {
      malformed(line_no, "event ids must strictly increase");
    }
    file.events.push_back(std::move(e));
  }
  return file;
}

LogFile parse_edge_list(std::string_view text) {
  std::istringstream is{std::string(text)};
  return read_edge_list(is);
}

}  // namespace camflow::audit
