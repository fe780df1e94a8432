#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "camflow/audit/log.hpp"
#include "camflow/decision.hpp"
#include "camflow/entity_id.hpp"
#include "camflow/ifc.hpp"
#include "camflow/naming.hpp"

namespace camflow::sim {

enum class EntityClass : std::uint8_t { process, file, pipe, store_record };

std::string_view to_string(EntityClass cls) noexcept;
/// Accepts "process", "file", "pipe", "store" / "store-record".
EntityClass parse_entity_class(std::string_view text);

struct SimEntity {
  EntityId id;
  std::string name;
  std::string role;
  EntityState state;
  EntityClass cls = EntityClass::process;
  bool trusted = false;
  std::optional<EntityId> parent;
  /// Contents for passive objects; memory for processes.
  std::string payload;
};

struct Checkpoint {
  EntityId entity;
  SecurityContext context;
  PrivilegeSets privileges;
  std::string payload;
  EventId taken_at = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct ReadResult {
  Decision decision;
  std::string bytes;
};

struct TagResult {
  Decision decision;
  std::optional<Tag> tag;
};

struct MonitorStats {
  std::uint64_t flow_checks = 0;
  std::uint64_t transfers = 0;
  std::uint64_t bytes_moved = 0;
};

/// Per-machine options for boot-time declarations.
struct BootSpec {
  std::string name;
  std::string role;
  SecurityContext context;
  PrivilegeSets privileges;  // processes only
  bool trusted = false;      // processes only
  std::string payload;
};

/// Simulated reference monitor. Every operation that moves bytes evaluates
/// can_flow once and records one audit event, whatever the outcome.
/// Operations on one machine are serialised; machines are independent.
class Kernel {
 public:
  Kernel(NamingAuthority& authority, audit::AuditLog& log);

  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  // -- boot configuration ---------------------------------------------------
  void add_machine(const std::string& name);
  bool has_machine(const std::string& name) const;
  std::vector<std::string> machines() const;

  /// Boot-time process; the only way to obtain a trusted process without a
  /// trusted parent. Throws coi_violation if the declared state breaks a
  /// registered conflict.
  EntityId boot_process(const std::string& machine, BootSpec spec);
  EntityId boot_object(const std::string& machine, EntityClass cls, BootSpec spec);

  // -- mediated operations --------------------------------------------------
  EntityId spawn(const EntityId& parent, bool trusted_request, std::string name = {});
  EntityId create_object(const EntityId& creator, EntityClass cls, std::string name = {});
  Decision write(const EntityId& writer, const EntityId& object, std::string_view bytes);
  /// Writes the writer's entire memory.
  Decision write_memory(const EntityId& writer, const EntityId& object);
  /// Appends the object's bytes to the reader's memory. Reading a pipe drains it;
  /// files and store records are left intact.
  ReadResult read(const EntityId& reader, const EntityId& object);

  Decision change_label(const EntityId& process, const Tag& tag, LabelOp op, TagKind dimension);
  Decision delegate(const EntityId& granter, const EntityId& grantee, const Tag& tag, LabelOp op,
                    TagKind dimension);
  TagResult create_tag(const EntityId& process, TagKind kind, std::string_view name = {});

  Checkpoint checkpoint(const EntityId& process) const;
  Decision restore(const EntityId& process, const Checkpoint& cp);

  Decision trusted_set_context(const EntityId& actor, const EntityId& target,
                               const SecurityContext& ctx, const PrivilegeSets& privileges);

  /// Raw remote link. Only processes with S = I = {} may use one.
  Decision direct_connect(const EntityId& a, const EntityId& b);
  Decision direct_send(const EntityId& from, const EntityId& to, std::string_view bytes);

  /// Bytes produced inside a process (computation, or a value handed over by
  /// the middleware after its own per-attribute checks). Not a flow.
  void append_memory(const EntityId& process, std::string_view bytes);

  /// Audit hook for enforcement layers built on top of the kernel
  /// (middleware). Fills contexts, names and machine metadata from the
  /// current entity state.
  EventId record_flow(audit::EventKind kind, const EntityId& source,
                      const SecurityContext& source_ctx, const EntityId& target,
                      const Decision& decision, std::string op, audit::Metadata extra = {});
  /// Counts one can_flow evaluation performed outside the kernel.
  void note_flow_check() noexcept { flow_checks_.fetch_add(1, std::memory_order_relaxed); }

  // -- inspection -----------------------------------------------------------
  SimEntity entity(const EntityId& id) const;
  bool exists(const EntityId& id) const;
  SecurityContext context(const EntityId& id) const;
  std::string payload(const EntityId& id) const;
  std::vector<EntityId> entities() const;
  MonitorStats stats() const noexcept;

  NamingAuthority& authority() noexcept { return authority_; }
  audit::AuditLog& log() noexcept { return log_; }

 private:
  struct Machine {
    std::mutex mu;
    std::uint64_t next_local = 1;
    std::map<std::uint64_t, SimEntity> entities;
  };

  Machine& machine(const std::string& name) const;
  static SimEntity& lookup(Machine& m, const EntityId& id);
  static SimEntity& process_in(Machine& m, const EntityId& id, const char* role);
  static SimEntity& object_in(Machine& m, const EntityId& id);
  Machine& same_machine(const EntityId& a, const EntityId& b) const;

  EventId emit(audit::EventKind kind, const SimEntity& source, const SecurityContext& source_ctx,
               const SimEntity& target, const SecurityContext& target_ctx,
               const Decision& decision, bool via_trusted, std::string op,
               audit::Metadata extra = {});
  FlowDecision check_flow(const SecurityContext& source, const SecurityContext& sink) noexcept;
  void count_transfer(std::size_t bytes) noexcept;
  EntityId insert(const std::string& machine, SimEntity entity);

  NamingAuthority& authority_;
  audit::AuditLog& log_;

  mutable std::shared_mutex machines_mu_;
  std::map<std::string, std::unique_ptr<Machine>> machines_;

  std::mutex links_mu_;
  std::set<std::pair<EntityId, EntityId>> direct_links_;

  std::atomic<std::uint64_t> flow_checks_{0};
  std::atomic<std::uint64_t> transfers_{0};
  std::atomic<std::uint64_t> bytes_moved_{0};
};

/// Compact context rendering for audit metadata, e.g. "S=1,2;I=-".
std::string context_metadata(const SecurityContext& ctx);

}  // namespace camflow::sim
