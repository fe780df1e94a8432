#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "camflow/ifc.hpp"
#include "camflow/sim/kernel.hpp"

namespace camflow::scenario {

struct SourceLoc {
  std::size_t line = 0;
  std::size_t column = 0;
};

enum class Expectation : std::uint8_t { none, allow, deny, error };

/// Tag names as written; resolved against the program's tag table.
struct LabelSpec {
  std::vector<std::string> secrecy;
  std::vector<std::string> integrity;

  friend bool operator==(const LabelSpec&, const LabelSpec&) = default;
};

struct PrivilegeSpec {
  std::vector<std::string> add_secrecy;
  std::vector<std::string> remove_secrecy;
  std::vector<std::string> add_integrity;
  std::vector<std::string> remove_integrity;

  bool empty() const noexcept {
    return add_secrecy.empty() && remove_secrecy.empty() && add_integrity.empty() &&
           remove_integrity.empty();
  }
  friend bool operator==(const PrivilegeSpec&, const PrivilegeSpec&) = default;
};

// -- declarations ------------------------------------------------------------

struct MachineDecl {
  std::string name;
  friend bool operator==(const MachineDecl&, const MachineDecl&) = default;
};

struct TagDecl {
  TagKind kind = TagKind::secrecy;
  std::string name;
  friend bool operator==(const TagDecl&, const TagDecl&) = default;
};

struct ConflictDecl {
  std::string name;
  std::vector<std::string> tags;
  friend bool operator==(const ConflictDecl&, const ConflictDecl&) = default;
};

struct EntityDecl {
  std::string name;
  sim::EntityClass cls = sim::EntityClass::process;
  std::string machine = "local";
  LabelSpec context;
  PrivilegeSpec privileges;
  bool trusted = false;
  std::string role;
  std::optional<std::string> data;
  friend bool operator==(const EntityDecl&, const EntityDecl&) = default;
};

struct SchemaAttr {
  std::string name;
  std::optional<LabelSpec> fixed;
  friend bool operator==(const SchemaAttr&, const SchemaAttr&) = default;
};

struct SchemaDecl {
  std::string name;
  std::vector<SchemaAttr> attributes;
  friend bool operator==(const SchemaDecl&, const SchemaDecl&) = default;
};

struct PrincipalDecl {
  std::string user;
  LabelSpec context;
  friend bool operator==(const PrincipalDecl&, const PrincipalDecl&) = default;
};

struct AppDecl {
  std::string name;
  std::optional<std::string> init;  // memory produced by instance set-up
  friend bool operator==(const AppDecl&, const AppDecl&) = default;
};

struct AuthorizeDecl {
  std::string gateway;
  std::string user;
  friend bool operator==(const AuthorizeDecl&, const AuthorizeDecl&) = default;
};

// -- commands ----------------------------------------------------------------

struct SpawnCmd {
  std::string parent;
  std::string child;
  bool trusted = false;
  friend bool operator==(const SpawnCmd&, const SpawnCmd&) = default;
};

struct CreateCmd {
  std::string creator;
  std::string object;
  sim::EntityClass cls = sim::EntityClass::file;
  friend bool operator==(const CreateCmd&, const CreateCmd&) = default;
};

/// Without `data` the writer's whole memory is written.
struct WriteCmd {
  std::string writer;
  std::string object;
  std::optional<std::string> data;
  friend bool operator==(const WriteCmd&, const WriteCmd&) = default;
};

struct ReadCmd {
  std::string reader;
  std::string object;
  friend bool operator==(const ReadCmd&, const ReadCmd&) = default;
};

/// Bytes produced by a process's own computation.
struct ComputeCmd {
  std::string process;
  std::string data;
  friend bool operator==(const ComputeCmd&, const ComputeCmd&) = default;
};

struct LabelCmd {
  LabelOp op = LabelOp::add;
  std::string entity;
  TagKind dimension = TagKind::secrecy;
  std::string tag;
  friend bool operator==(const LabelCmd&, const LabelCmd&) = default;
};

struct NewTagCmd {
  std::string process;
  TagKind kind = TagKind::secrecy;
  std::string name;
  friend bool operator==(const NewTagCmd&, const NewTagCmd&) = default;
};

struct DelegateCmd {
  std::string granter;
  std::string grantee;
  LabelOp op = LabelOp::add;
  TagKind dimension = TagKind::secrecy;
  std::string tag;
  friend bool operator==(const DelegateCmd&, const DelegateCmd&) = default;
};

struct SetContextCmd {
  std::string actor;
  std::string target;
  LabelSpec context;
  PrivilegeSpec privileges;
  friend bool operator==(const SetContextCmd&, const SetContextCmd&) = default;
};

struct CheckpointCmd {
  std::string process;
  std::string checkpoint;
  friend bool operator==(const CheckpointCmd&, const CheckpointCmd&) = default;
};

struct RestoreCmd {
  std::string process;
  std::string checkpoint;
  friend bool operator==(const RestoreCmd&, const RestoreCmd&) = default;
};

/// Without `claims` the endpoint asserts exactly its current tags.
struct RegisterCmd {
  std::string entity;
  std::string proxy;
  std::optional<std::vector<std::string>> claims;
  friend bool operator==(const RegisterCmd&, const RegisterCmd&) = default;
};

struct ConnectCmd {
  std::string name;
  std::string a;
  std::string b;
  bool both = false;
  friend bool operator==(const ConnectCmd&, const ConnectCmd&) = default;
};

struct SendValue {
  std::string attribute;
  std::string value;
  std::optional<LabelSpec> label;
  friend bool operator==(const SendValue&, const SendValue&) = default;
};

struct SendCmd {
  std::string sender;
  std::string connection;
  std::string schema;
  std::vector<SendValue> values;
  friend bool operator==(const SendCmd&, const SendCmd&) = default;
};

struct ReceiveCmd {
  std::string receiver;
  std::string connection;
  friend bool operator==(const ReceiveCmd&, const ReceiveCmd&) = default;
};

struct DirectConnectCmd {
  std::string a;
  std::string b;
  friend bool operator==(const DirectConnectCmd&, const DirectConnectCmd&) = default;
};

struct DirectSendCmd {
  std::string from;
  std::string to;
  std::string data;
  friend bool operator==(const DirectSendCmd&, const DirectSendCmd&) = default;
};

struct SessionOpenCmd {
  std::string session;
  std::string gateway;
  std::string user;
  std::string app;
  friend bool operator==(const SessionOpenCmd&, const SessionOpenCmd&) = default;
};

struct SessionCloseCmd {
  std::string session;
  friend bool operator==(const SessionCloseCmd&, const SessionCloseCmd&) = default;
};

struct ExpectPayloadCmd {
  std::string entity;
  bool contains = true;
  std::string text;
  friend bool operator==(const ExpectPayloadCmd&, const ExpectPayloadCmd&) = default;
};

struct ExpectContextCmd {
  std::string entity;
  LabelSpec context;
  friend bool operator==(const ExpectContextCmd&, const ExpectContextCmd&) = default;
};

/// Checks the last message `receiver` took off any connection.
struct ExpectAttrCmd {
  std::string receiver;
  std::string attribute;
  std::optional<std::string> value;  // nullopt: expect null
  friend bool operator==(const ExpectAttrCmd&, const ExpectAttrCmd&) = default;
};

using StatementBody =
    std::variant<MachineDecl, TagDecl, ConflictDecl, EntityDecl, SchemaDecl, PrincipalDecl, AppDecl,
                 AuthorizeDecl, SpawnCmd, CreateCmd, WriteCmd, ReadCmd, ComputeCmd, LabelCmd,
                 NewTagCmd, DelegateCmd, SetContextCmd, CheckpointCmd, RestoreCmd, RegisterCmd,
                 ConnectCmd, SendCmd, ReceiveCmd, DirectConnectCmd, DirectSendCmd, SessionOpenCmd,
                 SessionCloseCmd, ExpectPayloadCmd, ExpectContextCmd, ExpectAttrCmd>;

struct Statement {
  StatementBody body;
  Expectation expect = Expectation::none;
  SourceLoc loc;  // ignored by ==

  bool is_declaration() const noexcept { return body.index() <= 7; }

  friend bool operator==(const Statement& a, const Statement& b) {
    return a.body == b.body && a.expect == b.expect;
  }
};

struct Program {
  std::vector<Statement> statements;

  std::size_t declaration_count() const noexcept;
  std::size_t command_count() const noexcept;

  friend bool operator==(const Program&, const Program&) = default;
};

enum class ParseErrorKind : std::uint8_t { syntax, unresolved_name, duplicate_declaration };

std::string_view to_string(ParseErrorKind kind) noexcept;

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, SourceLoc loc, const std::string& message);

  ParseErrorKind kind() const noexcept { return kind_; }
  SourceLoc loc() const noexcept { return loc_; }

 private:
  ParseErrorKind kind_;
  SourceLoc loc_;
};

/// Parses the line-oriented scenario language (docs/dsl.md). Stops at the
/// first error.
Program parse(std::string_view text);

/// Canonical text of `program`; parse(print(p)) == p.
std::string print(const Program& program);
std::string print(const Statement& statement);

}  // namespace camflow::scenario
