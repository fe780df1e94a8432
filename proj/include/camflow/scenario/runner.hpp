#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "camflow/audit/log.hpp"
#include "camflow/mw/middleware.hpp"
#include "camflow/naming.hpp"
#include "camflow/scenario/program.hpp"
#include "camflow/scenario/session.hpp"
#include "camflow/sim/kernel.hpp"

namespace camflow::scenario {

enum class Outcome : std::uint8_t { ok, allow, deny, error };

std::string_view to_string(Outcome outcome) noexcept;

struct CommandResult {
  std::size_t index = 0;  // 1-based position among statements
  SourceLoc loc;
  std::string statement;
  Outcome outcome = Outcome::ok;
  std::string detail;
  Expectation expect = Expectation::none;
  bool met = true;
};

struct RunReport {
  std::vector<CommandResult> results;
  /// Index of the first statement whose outcome broke its expectation, or
  /// that raised an error nobody expected. Execution stops there.
  std::optional<std::size_t> failed_index;
  std::string failure;

  bool passed() const noexcept { return !failed_index.has_value(); }
};

/// One line per executed statement, then a summary line.
std::string format_report(const RunReport& report);

/// Executes a program against a fresh simulator. A runner is single use.
class Runner {
 public:
  Runner();

  RunReport run(const Program& program);

  sim::Kernel& kernel() noexcept { return *kernel_; }
  mw::Middleware& middleware() noexcept { return *middleware_; }
  audit::AuditLog& log() noexcept { return *log_; }
  NamingAuthority& authority() noexcept { return *authority_; }
  SessionManager& sessions() noexcept { return *sessions_; }

  std::optional<EntityId> entity(const std::string& name) const;
  std::optional<Tag> tag(const std::string& name) const;

 private:
  struct Step {
    Outcome outcome = Outcome::ok;
    std::string detail;
  };

  Step execute(const Statement& st);
  Step from_decision(const Decision& d) const;

  EntityId resolve_entity(const std::string& name) const;
  Tag resolve_tag(const std::string& name) const;
  std::vector<Tag> resolve_tags(const std::vector<std::string>& names) const;
  SecurityContext resolve_context(const LabelSpec& spec) const;
  PrivilegeSets resolve_privileges(const PrivilegeSpec& spec) const;
  void ensure_machine(const std::string& name);
  std::string describe(const Decision& d) const;

  std::unique_ptr<NamingAuthority> authority_;
  std::unique_ptr<audit::AuditLog> log_;
  std::unique_ptr<sim::Kernel> kernel_;
  std::unique_ptr<mw::Middleware> middleware_;
  std::unique_ptr<SessionManager> sessions_;

  std::map<std::string, EntityId> entities_;
  std::map<std::string, Tag> tags_;
  std::map<std::string, sim::Checkpoint> checkpoints_;
  std::map<std::string, mw::ConnectionId> connections_;
  std::map<EntityId, mw::Message> last_received_;
};

/// Convenience wrapper: parse and run. Parse errors propagate as ParseError.
RunReport run_text(std::string_view text, Runner& runner);

}  // namespace camflow::scenario
