#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "camflow/scenario/program.hpp"

namespace camflow::scenario {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

struct Token {
  std::string text;
  std::size_t column = 0;  // 1-based
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

bool is_ident(std::string_view s) {
  return !s.empty() && s.front() != '-' && s.front() != '.' &&
         std::all_of(s.begin(), s.end(), is_ident_char);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : line_no_(line_no) { tokenize(line); }

  bool empty() const noexcept { return tokens_.empty(); }
  std::vector<Token>& tokens() noexcept { return tokens_; }

  [[noreturn]] void fail(ParseErrorKind kind, std::size_t column, const std::string& msg) const {
    throw ParseError(kind, SourceLoc{line_no_, column}, msg);
  }
  [[noreturn]] void syntax(std::size_t column, const std::string& msg) const {
    fail(ParseErrorKind::syntax, column, msg);
  }

  SourceLoc loc(std::size_t column) const { return SourceLoc{line_no_, column}; }

 private:
  void tokenize(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      if (std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
        continue;
      }
      if (line[i] == '#') break;
      Token tok{{}, i + 1};
      int depth = 0;
      bool in_quote = false;
      while (i < line.size()) {
        char c = line[i];
        if (in_quote) {
          tok.text += c;
          if (c == '\\' && i + 1 < line.size()) {
            tok.text += line[++i];
          } else if (c == '"') {
            in_quote = false;
          }
          ++i;
          continue;
        }
        if (depth == 0 && std::isspace(static_cast<unsigned char>(c))) break;
        if (c == '"') in_quote = true;
        if (c == '[' || c == '{') ++depth;
        if (c == ']' || c == '}') {
          if (--depth < 0) syntax(i + 1, "unbalanced '" + std::string(1, c) + "'");
        }
        tok.text += c;
        ++i;
      }
      if (in_quote) syntax(tok.column, "unterminated string");
      if (depth != 0) syntax(tok.column, "unbalanced brackets");
      tokens_.push_back(std::move(tok));
    }
  }

  std::size_t line_no_;
  std::vector<Token> tokens_;
};

std::string unquote(const LineParser& lp, const Token& tok, std::string_view raw) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    lp.syntax(tok.column, "expected a quoted string, got '" + std::string(raw) + "'");
  }
  std::string out;
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c == '"') lp.syntax(tok.column, "stray quote in string");
    if (c != '\\') {
      out += c;
      continue;
    }
    if (i + 2 >= raw.size()) lp.syntax(tok.column, "dangling escape");
    switch (raw[++i]) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      default: lp.syntax(tok.column, "unknown escape '\\" + std::string(1, raw[i]) + "'");
    }
  }
  return out;
}

class Parser {
 public:
  Program parse(std::string_view text) {
    Program program;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++line_no;
      std::string_view line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      LineParser lp(line, line_no);
      if (!lp.empty()) program.statements.push_back(statement(lp));
      if (end == text.size()) break;
      start = end + 1;
    }
    return program;
  }

 private:
  using Tokens = std::vector<Token>;

  Statement statement(LineParser& lp) {
    Tokens& toks = lp.tokens();
    Statement st;
    st.loc = lp.loc(toks.front().column);
    if (toks.size() >= 2 && toks[toks.size() - 2].text == "expect") {
      const Token& e = toks.back();
      if (e.text == "allow") {
        st.expect = Expectation::allow;
      } else if (e.text == "deny") {
        st.expect = Expectation::deny;
      } else if (e.text == "error") {
        st.expect = Expectation::error;
      } else {
        lp.syntax(e.column, "expect takes allow, deny or error");
      }
      toks.resize(toks.size() - 2);
      if (toks.empty()) lp.syntax(st.loc.column, "expectation without a statement");
    }
    Cursor c{lp, toks, 1};
    const std::string& kw = toks.front().text;
    st.body = dispatch(kw, c);
    c.finish();
    return st;
  }

  struct Cursor {
    LineParser& lp;
    Tokens& toks;
    std::size_t pos;

    bool more() const { return pos < toks.size(); }
    const Token& peek() const { return toks[pos]; }
    std::size_t column() const {
      return more() ? toks[pos].column : toks.back().column + toks.back().text.size();
    }
    const Token& next(const char* what) {
      if (!more()) lp.syntax(column(), std::string("expected ") + what);
      return toks[pos++];
    }
    std::string ident(const char* what) {
      const Token& t = next(what);
      if (!is_ident(t.text)) {
        lp.syntax(t.column, std::string("expected ") + what + ", got '" + t.text + "'");
      }
      return t.text;
    }
    bool accept(std::string_view word) {
      if (more() && toks[pos].text == word) {
        ++pos;
        return true;
      }
      return false;
    }
    void finish() const {
      if (more()) lp.syntax(toks[pos].column, "unexpected '" + toks[pos].text + "'");
    }
  };

  // -- symbol tables -------------------------------------------------------
  enum class Space { tag, machine, entity, conflict, schema, connection, checkpoint, principal, app,
                     session };

  static const char* space_name(Space s) {
    switch (s) {
      case Space::tag: return "tag";
      case Space::machine: return "machine";
      case Space::entity: return "entity";
      case Space::conflict: return "conflict";
      case Space::schema: return "schema";
      case Space::connection: return "connection";
      case Space::checkpoint: return "checkpoint";
      case Space::principal: return "principal";
      case Space::app: return "app";
      case Space::session: return "session";
    }
    return "name";
  }

  void declare(Cursor& c, Space s, const std::string& name, std::size_t column) {
    bool fresh = s == Space::machine && name == "local" ? !std::exchange(local_declared_, true)
                                                         : names_[s].insert(name).second;
    if (!fresh) {
      c.lp.fail(ParseErrorKind::duplicate_declaration, column,
                std::string(space_name(s)) + " '" + name + "' already declared");
    }
  }

  std::string declare_ident(Cursor& c, Space s, const char* what) {
    std::size_t col = c.column();
    std::string name = c.ident(what);
    declare(c, s, name, col);
    return name;
  }

  std::string resolve(Cursor& c, Space s, const char* what) {
    std::size_t col = c.column();
    std::string name = c.ident(what);
    check(c, s, name, col);
    return name;
  }

  void check(Cursor& c, Space s, const std::string& name, std::size_t column) const {
    if (s == Space::machine && name == "local") return;
    auto it = names_.find(s);
    if (it == names_.end() || !it->second.contains(name)) {
      c.lp.fail(ParseErrorKind::unresolved_name, column,
                std::string("unknown ") + space_name(s) + " '" + name + "'");
    }
  }

  void check_tag(Cursor& c, const std::string& name, std::size_t column,
                 std::optional<TagKind> kind) const {
    auto it = tag_kinds_.find(name);
    if (it == tag_kinds_.end()) {
      c.lp.fail(ParseErrorKind::unresolved_name, column, "unknown tag '" + name + "'");
    }
    if (kind && it->second != *kind) {
      c.lp.syntax(column, "tag '" + name + "' is a " + std::string(to_string(it->second)) +
                              " tag");
    }
  }

  void declare_tag(Cursor& c, TagKind kind, const std::string& name, std::size_t column,
                   bool allow_existing) {
    auto it = tag_kinds_.find(name);
    if (it != tag_kinds_.end()) {
      if (allow_existing && it->second == kind) return;
      c.lp.fail(ParseErrorKind::duplicate_declaration, column, "tag '" + name + "' already declared");
    }
    tag_kinds_.emplace(name, kind);
  }

  TagKind tag_kind(Cursor& c) {
    const Token& t = c.next("secrecy or integrity");
    if (t.text == "secrecy") return TagKind::secrecy;
    if (t.text == "integrity") return TagKind::integrity;
    c.lp.syntax(t.column, "expected secrecy or integrity, got '" + t.text + "'");
  }

  // -- value forms ---------------------------------------------------------

  /// "[a,b]" -> {a, b}, each resolved as a tag of `kind` (any kind if unset).
  std::vector<std::string> tag_list(Cursor& c, const Token& tok, std::string_view raw,
                                    std::optional<TagKind> kind) const {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
      c.lp.syntax(tok.column, "expected a tag list like [a,b]");
    }
    std::vector<std::string> out;
    std::string_view inner = raw.substr(1, raw.size() - 2);
    if (inner.empty()) return out;
    std::size_t start = 0;
    while (true) {
      auto comma = inner.find(',', start);
      std::string name(inner.substr(start, comma - start));
      if (!is_ident(name)) c.lp.syntax(tok.column, "bad tag name '" + name + "' in list");
      check_tag(c, name, tok.column, kind);
      if (std::find(out.begin(), out.end(), name) != out.end()) {
        c.lp.syntax(tok.column, "tag '" + name + "' listed twice");
      }
      out.push_back(std::move(name));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  /// Consumes optional S=, I= and (when `privileges` is set) P±S=, P±I=
  /// tokens in any order.
  void label_fields(Cursor& c, LabelSpec& label, PrivilegeSpec* privileges) const {
    std::set<std::string> seen;
    while (c.more()) {
      const Token& t = c.peek();
      auto eq = t.text.find('=');
      if (eq == std::string::npos) return;
      std::string key = t.text.substr(0, eq);
      std::vector<std::string>* dest = nullptr;
      std::optional<TagKind> kind;
      if (key == "S") {
        dest = &label.secrecy, kind = TagKind::secrecy;
      } else if (key == "I") {
        dest = &label.integrity, kind = TagKind::integrity;
      } else if (privileges && key == "P+S") {
        dest = &privileges->add_secrecy, kind = TagKind::secrecy;
      } else if (privileges && key == "P-S") {
        dest = &privileges->remove_secrecy, kind = TagKind::secrecy;
      } else if (privileges && key == "P+I") {
        dest = &privileges->add_integrity, kind = TagKind::integrity;
      } else if (privileges && key == "P-I") {
        dest = &privileges->remove_integrity, kind = TagKind::integrity;
      } else {
        return;
      }
      if (!seen.insert(key).second) c.lp.syntax(t.column, key + " given twice");
      *dest = tag_list(c, t, std::string_view(t.text).substr(eq + 1), kind);
      ++c.pos;
    }
  }

  /// "{S=[..] I=[..]}" attached to an attribute.
  LabelSpec braced_label(Cursor& outer, const Token& tok, std::string_view raw) const {
    if (raw.size() < 2 || raw.front() != '{' || raw.back() != '}') {
      outer.lp.syntax(tok.column, "expected a label like {S=[a] I=[b]}");
    }
    std::string inner(raw.substr(1, raw.size() - 2));
    Tokens sub;
    std::istringstream in(inner);
    std::string word;
    while (in >> word) sub.push_back(Token{word, tok.column});
    Cursor c{outer.lp, sub, 0};
    LabelSpec label;
    label_fields(c, label, nullptr);
    if (c.more()) outer.lp.syntax(tok.column, "unexpected '" + c.peek().text + "' in label");
    return label;
  }

  // -- statements ----------------------------------------------------------

  StatementBody dispatch(const std::string& kw, Cursor& c) {
    if (kw == "machine") return MachineDecl{declare_ident(c, Space::machine, "machine name")};
    if (kw == "tag") {
      TagKind kind = tag_kind(c);
      std::size_t col = c.column();
      std::string name = c.ident("tag name");
      declare_tag(c, kind, name, col, false);
      return TagDecl{kind, name};
    }
    if (kw == "conflict") {
      ConflictDecl d;
      d.name = declare_ident(c, Space::conflict, "conflict name");
      while (c.more()) {
        std::size_t col = c.column();
        std::string t = c.ident("tag name");
        check_tag(c, t, col, std::nullopt);
        d.tags.push_back(t);
      }
      return d;
    }
    if (kw == "entity") return entity(c);
    if (kw == "schema") return schema(c);
    if (kw == "principal") {
      PrincipalDecl d;
      d.user = declare_ident(c, Space::principal, "user name");
      label_fields(c, d.context, nullptr);
      return d;
    }
    if (kw == "app") {
      AppDecl d;
      d.name = declare_ident(c, Space::app, "app name");
      if (c.more() && c.peek().text.starts_with("init=")) {
        const Token& t = c.next("init");
        d.init = unquote(c.lp, t, std::string_view(t.text).substr(5));
      }
      return d;
    }
    if (kw == "authorize") {
      AuthorizeDecl d;
      d.gateway = resolve(c, Space::entity, "gateway");
      d.user = resolve(c, Space::principal, "user");
      return d;
    }
    if (kw == "spawn") {
      SpawnCmd d;
      d.parent = resolve(c, Space::entity, "parent");
      d.child = declare_ident(c, Space::entity, "child name");
      d.trusted = c.accept("trusted");
      return d;
    }
    if (kw == "create") {
      CreateCmd d;
      d.creator = resolve(c, Space::entity, "creator");
      d.object = declare_ident(c, Space::entity, "object name");
      d.cls = object_class(c);
      return d;
    }
    if (kw == "write") {
      WriteCmd d;
      d.writer = resolve(c, Space::entity, "writer");
      d.object = resolve(c, Space::entity, "object");
      if (c.more()) {
        const Token& t = c.next("data");
        d.data = unquote(c.lp, t, t.text);
      }
      return d;
    }
    if (kw == "read") {
      ReadCmd d;
      d.reader = resolve(c, Space::entity, "reader");
      d.object = resolve(c, Space::entity, "object");
      return d;
    }
    if (kw == "compute") {
      ComputeCmd d;
      d.process = resolve(c, Space::entity, "process");
      const Token& t = c.next("data");
      d.data = unquote(c.lp, t, t.text);
      return d;
    }
    if (kw == "add" || kw == "remove") {
      LabelCmd d;
      d.op = kw == "add" ? LabelOp::add : LabelOp::remove;
      d.entity = resolve(c, Space::entity, "entity");
      d.dimension = tag_kind(c);
      std::size_t col = c.column();
      d.tag = c.ident("tag");
      check_tag(c, d.tag, col, d.dimension);
      return d;
    }
    if (kw == "newtag") {
      NewTagCmd d;
      d.process = resolve(c, Space::entity, "process");
      d.kind = tag_kind(c);
      std::size_t col = c.column();
      d.name = c.ident("tag name");
      if (!newtag_names_.insert(d.name).second) {
        c.lp.fail(ParseErrorKind::duplicate_declaration, col, "tag '" + d.name + "' created twice");
      }
      declare_tag(c, d.kind, d.name, col, true);
      return d;
    }
    if (kw == "delegate") {
      DelegateCmd d;
      d.granter = resolve(c, Space::entity, "granter");
      d.grantee = resolve(c, Space::entity, "grantee");
      const Token& p = c.next("+S, -S, +I or -I");
      if (p.text.size() != 2 || (p.text[0] != '+' && p.text[0] != '-') ||
          (p.text[1] != 'S' && p.text[1] != 'I')) {
        c.lp.syntax(p.column, "expected +S, -S, +I or -I, got '" + p.text + "'");
      }
      d.op = p.text[0] == '+' ? LabelOp::add : LabelOp::remove;
      d.dimension = p.text[1] == 'S' ? TagKind::secrecy : TagKind::integrity;
      std::size_t col = c.column();
      d.tag = c.ident("tag");
      check_tag(c, d.tag, col, d.dimension);
      return d;
    }
    if (kw == "set-context") {
      SetContextCmd d;
      d.actor = resolve(c, Space::entity, "actor");
      d.target = resolve(c, Space::entity, "target");
      label_fields(c, d.context, &d.privileges);
      return d;
    }
    if (kw == "checkpoint") {
      CheckpointCmd d;
      d.process = resolve(c, Space::entity, "process");
      d.checkpoint = declare_ident(c, Space::checkpoint, "checkpoint name");
      return d;
    }
    if (kw == "restore") {
      RestoreCmd d;
      d.process = resolve(c, Space::entity, "process");
      d.checkpoint = resolve(c, Space::checkpoint, "checkpoint");
      return d;
    }
    if (kw == "register") {
      RegisterCmd d;
      d.entity = resolve(c, Space::entity, "entity");
      if (!c.accept("via")) c.lp.syntax(c.column(), "expected 'via <proxy>'");
      d.proxy = resolve(c, Space::entity, "proxy");
      if (c.more() && c.peek().text.starts_with("claims=")) {
        const Token& t = c.next("claims");
        d.claims = tag_list(c, t, std::string_view(t.text).substr(7), std::nullopt);
      }
      return d;
    }
    if (kw == "connect") {
      ConnectCmd d;
      d.name = declare_ident(c, Space::connection, "connection name");
      d.a = resolve(c, Space::entity, "endpoint");
      d.b = resolve(c, Space::entity, "endpoint");
      d.both = c.accept("both");
      return d;
    }
    if (kw == "send") return send(c);
    if (kw == "receive") {
      ReceiveCmd d;
      d.receiver = resolve(c, Space::entity, "receiver");
      d.connection = resolve(c, Space::connection, "connection");
      return d;
    }
    if (kw == "direct-connect") {
      DirectConnectCmd d;
      d.a = resolve(c, Space::entity, "process");
      d.b = resolve(c, Space::entity, "process");
      return d;
    }
    if (kw == "direct-send") {
      DirectSendCmd d;
      d.from = resolve(c, Space::entity, "sender");
      d.to = resolve(c, Space::entity, "receiver");
      const Token& t = c.next("data");
      d.data = unquote(c.lp, t, t.text);
      return d;
    }
    if (kw == "session-open") {
      SessionOpenCmd d;
      std::size_t col = c.column();
      d.session = c.ident("session id");
      declare(c, Space::session, d.session, col);
      declare(c, Space::entity, d.session, col);
      d.gateway = resolve(c, Space::entity, "gateway");
      d.user = resolve(c, Space::principal, "user");
      d.app = resolve(c, Space::app, "app");
      return d;
    }
    if (kw == "session-close") {
      return SessionCloseCmd{resolve(c, Space::session, "session id")};
    }
    if (kw == "expect-payload") {
      ExpectPayloadCmd d;
      d.entity = resolve(c, Space::entity, "entity");
      const Token& mode = c.next("contains or lacks");
      if (mode.text == "contains") {
        d.contains = true;
      } else if (mode.text == "lacks") {
        d.contains = false;
      } else {
        c.lp.syntax(mode.column, "expected contains or lacks");
      }
      const Token& t = c.next("text");
      d.text = unquote(c.lp, t, t.text);
      return d;
    }
    if (kw == "expect-context") {
      ExpectContextCmd d;
      d.entity = resolve(c, Space::entity, "entity");
      label_fields(c, d.context, nullptr);
      return d;
    }
    if (kw == "expect-attr") {
      ExpectAttrCmd d;
      d.receiver = resolve(c, Space::entity, "receiver");
      d.attribute = c.ident("attribute");
      const Token& t = c.next("value or null");
      if (t.text != "null") d.value = unquote(c.lp, t, t.text);
      return d;
    }
    c.lp.syntax(c.toks.front().column, "unknown statement '" + kw + "'");
  }

  sim::EntityClass object_class(Cursor& c) {
    const Token& t = c.next("file, pipe or store");
    if (t.text == "file") return sim::EntityClass::file;
    if (t.text == "pipe") return sim::EntityClass::pipe;
    if (t.text == "store") return sim::EntityClass::store_record;
    c.lp.syntax(t.column, "expected file, pipe or store, got '" + t.text + "'");
  }

  StatementBody entity(Cursor& c) {
    EntityDecl d;
    d.name = declare_ident(c, Space::entity, "entity name");
    if (c.more()) {
      const std::string& w = c.peek().text;
      if (w == "process") {
        ++c.pos;
      } else if (w == "file" || w == "pipe" || w == "store") {
        d.cls = object_class(c);
      }
    }
    if (c.accept("on")) d.machine = resolve(c, Space::machine, "machine");
    label_fields(c, d.context, &d.privileges);
    while (c.more()) {
      const Token& t = c.next("option");
      if (t.text == "trusted") {
        d.trusted = true;
      } else if (t.text.starts_with("role=") && is_ident(t.text.substr(5))) {
        d.role = t.text.substr(5);
      } else if (t.text.starts_with("data=")) {
        d.data = unquote(c.lp, t, std::string_view(t.text).substr(5));
      } else {
        c.lp.syntax(t.column, "unexpected '" + t.text + "'");
      }
    }
    if (d.cls != sim::EntityClass::process && (d.trusted || !d.privileges.empty())) {
      c.lp.syntax(c.toks.front().column, "passive entity '" + d.name +
                                             "' cannot be trusted or hold privileges");
    }
    return d;
  }

  StatementBody schema(Cursor& c) {
    SchemaDecl d;
    d.name = declare_ident(c, Space::schema, "schema name");
    auto& attrs = schema_attrs_[d.name];
    while (c.more()) {
      const Token& t = c.next("attribute");
      auto brace = t.text.find('{');
      SchemaAttr a;
      a.name = t.text.substr(0, brace);
      if (!is_ident(a.name)) c.lp.syntax(t.column, "bad attribute name '" + a.name + "'");
      if (brace != std::string::npos) {
        a.fixed = braced_label(c, t, std::string_view(t.text).substr(brace));
      }
      if (!attrs.insert(a.name).second) {
        c.lp.fail(ParseErrorKind::duplicate_declaration, t.column,
                  "attribute '" + a.name + "' declared twice");
      }
      d.attributes.push_back(std::move(a));
    }
    return d;
  }

  StatementBody send(Cursor& c) {
    SendCmd d;
    d.sender = resolve(c, Space::entity, "sender");
    d.connection = resolve(c, Space::connection, "connection");
    d.schema = resolve(c, Space::schema, "schema");
    const auto& attrs = schema_attrs_[d.schema];
    std::set<std::string> seen;
    while (c.more()) {
      const Token& t = c.next("attribute value");
      auto eq = t.text.find('=');
      if (eq == std::string::npos) c.lp.syntax(t.column, "expected attr=\"value\"");
      SendValue v;
      v.attribute = t.text.substr(0, eq);
      if (!is_ident(v.attribute)) c.lp.syntax(t.column, "bad attribute name '" + v.attribute + "'");
      if (!attrs.contains(v.attribute)) {
        c.lp.fail(ParseErrorKind::unresolved_name, t.column,
                  "schema '" + d.schema + "' has no attribute '" + v.attribute + "'");
      }
      if (!seen.insert(v.attribute).second) {
        c.lp.syntax(t.column, "attribute '" + v.attribute + "' given twice");
      }
      std::string_view rest = std::string_view(t.text).substr(eq + 1);
      std::size_t close = std::string_view::npos;
      if (!rest.empty() && rest.front() == '"') {
        for (std::size_t i = 1; i < rest.size(); ++i) {
          if (rest[i] == '\\') {
            ++i;
          } else if (rest[i] == '"') {
            close = i;
            break;
          }
        }
      }
      if (close == std::string_view::npos) c.lp.syntax(t.column, "expected a quoted value");
      v.value = unquote(c.lp, t, rest.substr(0, close + 1));
      if (close + 1 < rest.size()) v.label = braced_label(c, t, rest.substr(close + 1));
      d.values.push_back(std::move(v));
    }
    return d;
  }

  std::map<Space, std::set<std::string>> names_;
  std::map<std::string, TagKind> tag_kinds_;
  std::set<std::string> newtag_names_;
  std::map<std::string, std::set<std::string>> schema_attrs_;
  bool local_declared_ = false;
};

// -- printing ----------------------------------------------------------------

std::string list(const std::vector<std::string>& names) {
  std::string out = "[";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  return out + "]";
}

std::string label_text(const LabelSpec& l) {
  return "S=" + list(l.secrecy) + " I=" + list(l.integrity);
}

std::string privilege_text(const PrivilegeSpec& p) {
  std::string out;
  auto field = [&](const char* key, const std::vector<std::string>& v) {
    if (!v.empty()) out += std::string(" ") + key + "=" + list(v);
  };
  field("P+S", p.add_secrecy);
  field("P-S", p.remove_secrecy);
  field("P+I", p.add_integrity);
  field("P-I", p.remove_integrity);
  return out;
}

std::string kind_text(TagKind k) { return std::string(to_string(k)); }

std::string class_text(sim::EntityClass cls) {
  return cls == sim::EntityClass::store_record ? "store" : std::string(sim::to_string(cls));
}

std::string body_text(const StatementBody& body) {
  return std::visit(
      overloaded{
          [](const MachineDecl& d) { return "machine " + d.name; },
          [](const TagDecl& d) { return "tag " + kind_text(d.kind) + " " + d.name; },
          [](const ConflictDecl& d) {
            std::string s = "conflict " + d.name;
            for (const auto& t : d.tags) s += " " + t;
            return s;
          },
          [](const EntityDecl& d) {
            std::string s = "entity " + d.name + " " + class_text(d.cls) + " on " + d.machine +
                            " " + label_text(d.context) + privilege_text(d.privileges);
            if (d.trusted) s += " trusted";
            if (!d.role.empty()) s += " role=" + d.role;
            if (d.data) s += " data=" + quote(*d.data);
            return s;
          },
          [](const SchemaDecl& d) {
            std::string s = "schema " + d.name;
            for (const auto& a : d.attributes) {
              s += " " + a.name;
              if (a.fixed) s += "{" + label_text(*a.fixed) + "}";
            }
            return s;
          },
          [](const PrincipalDecl& d) {
            return "principal " + d.user + " " + label_text(d.context);
          },
          [](const AppDecl& d) {
            return "app " + d.name + (d.init ? " init=" + quote(*d.init) : std::string());
          },
          [](const AuthorizeDecl& d) { return "authorize " + d.gateway + " " + d.user; },
          [](const SpawnCmd& d) {
            return "spawn " + d.parent + " " + d.child + (d.trusted ? " trusted" : "");
          },
          [](const CreateCmd& d) {
            return "create " + d.creator + " " + d.object + " " + class_text(d.cls);
          },
          [](const WriteCmd& d) {
            return "write " + d.writer + " " + d.object + (d.data ? " " + quote(*d.data) : "");
          },
          [](const ReadCmd& d) { return "read " + d.reader + " " + d.object; },
          [](const ComputeCmd& d) { return "compute " + d.process + " " + quote(d.data); },
          [](const LabelCmd& d) {
            return std::string(d.op == LabelOp::add ? "add " : "remove ") + d.entity + " " +
                   kind_text(d.dimension) + " " + d.tag;
          },
          [](const NewTagCmd& d) {
            return "newtag " + d.process + " " + kind_text(d.kind) + " " + d.name;
          },
          [](const DelegateCmd& d) {
            return "delegate " + d.granter + " " + d.grantee + " " +
                   (d.op == LabelOp::add ? "+" : "-") +
                   (d.dimension == TagKind::secrecy ? "S" : "I") + " " + d.tag;
          },
          [](const SetContextCmd& d) {
            return "set-context " + d.actor + " " + d.target + " " + label_text(d.context) +
                   privilege_text(d.privileges);
          },
          [](const CheckpointCmd& d) { return "checkpoint " + d.process + " " + d.checkpoint; },
          [](const RestoreCmd& d) { return "restore " + d.process + " " + d.checkpoint; },
          [](const RegisterCmd& d) {
            return "register " + d.entity + " via " + d.proxy +
                   (d.claims ? " claims=" + list(*d.claims) : "");
          },
          [](const ConnectCmd& d) {
            return "connect " + d.name + " " + d.a + " " + d.b + (d.both ? " both" : "");
          },
          [](const SendCmd& d) {
            std::string s = "send " + d.sender + " " + d.connection + " " + d.schema;
            for (const auto& v : d.values) {
              s += " " + v.attribute + "=" + quote(v.value);
              if (v.label) s += "{" + label_text(*v.label) + "}";
            }
            return s;
          },
          [](const ReceiveCmd& d) { return "receive " + d.receiver + " " + d.connection; },
          [](const DirectConnectCmd& d) { return "direct-connect " + d.a + " " + d.b; },
          [](const DirectSendCmd& d) {
            return "direct-send " + d.from + " " + d.to + " " + quote(d.data);
          },
          [](const SessionOpenCmd& d) {
            return "session-open " + d.session + " " + d.gateway + " " + d.user + " " + d.app;
          },
          [](const SessionCloseCmd& d) { return "session-close " + d.session; },
          [](const ExpectPayloadCmd& d) {
            return "expect-payload " + d.entity + (d.contains ? " contains " : " lacks ") +
                   quote(d.text);
          },
          [](const ExpectContextCmd& d) {
            return "expect-context " + d.entity + " " + label_text(d.context);
          },
          [](const ExpectAttrCmd& d) {
            return "expect-attr " + d.receiver + " " + d.attribute + " " +
                   (d.value ? quote(*d.value) : "null");
          },
      },
      body);
}

}  // namespace

std::string_view to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::syntax: return "syntax";
    case ParseErrorKind::unresolved_name: return "unresolved-name";
    case ParseErrorKind::duplicate_declaration: return "duplicate-declaration";
  }
  return "syntax";
}

ParseError::ParseError(ParseErrorKind kind, SourceLoc loc, const std::string& message)
    : std::runtime_error("line " + std::to_string(loc.line) + ", column " +
                         std::to_string(loc.column) + ": " + std::string(to_string(kind)) + ": " +
                         message),
      kind_(kind),
      loc_(loc) {}

std::size_t Program::declaration_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(statements.begin(), statements.end(),
                                                [](const Statement& s) { return s.is_declaration(); }));
}

std::size_t Program::command_count() const noexcept {
  return statements.size() - declaration_count();
}

Program parse(std::string_view text) { return Parser().parse(text); }

std::string print(const Statement& statement) {
  std::string s = body_text(statement.body);
  switch (statement.expect) {
    case Expectation::none: break;
    case Expectation::allow: s += " expect allow"; break;
    case Expectation::deny: s += " expect deny"; break;
    case Expectation::error: s += " expect error"; break;
  }
  return s;
}

std::string print(const Program& program) {
  std::string out;
  for (const auto& st : program.statements) out += print(st) + "\n";
  return out;
}

}  // namespace camflow::scenario
