#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "camflow/sim/kernel.hpp"

namespace camflow::scenario {

/// A declared user; stands in for an identity-provider login.
struct Principal {
  std::string user;
  SecurityContext context;
};

struct SessionBinding {
  std::string id;
  std::string user;
  std::string app;
  EntityId instance;
  EntityId gateway;
  SecurityContext context;
};

/// Gateway-side session handling: per-(gateway, app) pools of instances that
/// are checkpointed once after set-up and restored between users.
class SessionManager {
 public:
  explicit SessionManager(sim::Kernel& kernel) : kernel_(kernel) {}

  void add_principal(Principal principal);
  /// Adds `user` to the gateway's access-control table.
  void authorize(const EntityId& gateway, const std::string& user);
  /// `init` is appended to each new instance's memory before its checkpoint.
  void define_app(const std::string& name, std::string init = {});

  /// Throws untrusted_actor, unauthorised, invalid_argument (unknown user or
  /// app, session id in use) or coi_violation.
  SessionBinding open(const std::string& session_id, const EntityId& gateway,
                      const std::string& user, const std::string& app);
  /// Restores the instance to its post-set-up checkpoint and returns it to
  /// the pool. Throws invalid_argument for an unknown session.
  void close(const std::string& session_id);

  std::optional<SessionBinding> find(const std::string& session_id) const;
  std::vector<SessionBinding> live() const;
  std::size_t idle(const EntityId& gateway, const std::string& app) const;

 private:
  struct Instance {
    EntityId id;
    sim::Checkpoint post_init;
  };
  using PoolKey = std::pair<EntityId, std::string>;

  sim::Kernel& kernel_;
  std::map<std::string, Principal> principals_;
  std::set<std::pair<EntityId, std::string>> acl_;
  std::map<std::string, std::string> apps_;
  std::map<PoolKey, std::vector<Instance>> idle_;
  std::map<std::string, std::pair<SessionBinding, Instance>> live_;
  std::map<PoolKey, std::size_t> spawned_;
};

}  // namespace camflow::scenario
