#include "camflow/scenario/session.hpp"

#include "camflow/error.hpp"

namespace camflow::scenario {

void SessionManager::add_principal(Principal principal) {
  std::string user = principal.user;
  if (!principals_.emplace(user, std::move(principal)).second) {
    throw Error(Errc::duplicate_name, "principal '" + user + "'");
  }
}

void SessionManager::authorize(const EntityId& gateway, const std::string& user) {
  if (!principals_.contains(user)) throw Error(Errc::invalid_argument, "unknown user '" + user + "'");
  acl_.emplace(gateway, user);
}

void SessionManager::define_app(const std::string& name, std::string init) {
  if (!apps_.emplace(name, std::move(init)).second) {
    throw Error(Errc::duplicate_name, "app '" + name + "'");
  }
}

SessionBinding SessionManager::open(const std::string& session_id, const EntityId& gateway,
                                    const std::string& user, const std::string& app) {
  if (live_.contains(session_id)) {
    throw Error(Errc::invalid_argument, "session '" + session_id + "' is already open");
  }
  auto gw = kernel_.entity(gateway);
  if (gw.cls != sim::EntityClass::process || !gw.trusted) {
    throw Error(Errc::untrusted_actor, "gateway " + to_string(gateway) + " is not trusted");
  }
  auto principal = principals_.find(user);
  if (principal == principals_.end()) {
    throw Error(Errc::invalid_argument, "unknown user '" + user + "'");
  }
  auto app_it = apps_.find(app);
  if (app_it == apps_.end()) throw Error(Errc::invalid_argument, "unknown app '" + app + "'");
  if (!acl_.contains({gateway, user})) {
    throw Error(Errc::unauthorised, "gateway " + to_string(gateway) + " has not authorised '" +
                                        user + "'");
  }

  PoolKey key{gateway, app};
  auto& pool = idle_[key];
  Instance inst;
  if (!pool.empty()) {
    inst = pool.back();
    pool.pop_back();
    kernel_.restore(inst.id, inst.post_init);
  } else {
    std::size_t n = ++spawned_[key];
    inst.id = kernel_.spawn(gateway, false, app + "#" + std::to_string(n));
    if (!app_it->second.empty()) kernel_.append_memory(inst.id, app_it->second);
    inst.post_init = kernel_.checkpoint(inst.id);
  }

  Decision d = kernel_.trusted_set_context(gateway, inst.id, principal->second.context, {});
  if (!d) {
    pool.push_back(inst);
    throw Error(Errc::coi_violation, "session '" + session_id + "': " + d.detail);
  }
  SessionBinding binding{session_id, user, app, inst.id, gateway, principal->second.context};
  live_.emplace(session_id, std::make_pair(binding, inst));
  return binding;
}

void SessionManager::close(const std::string& session_id) {
  auto it = live_.find(session_id);
  if (it == live_.end()) throw Error(Errc::invalid_argument, "no open session '" + session_id + "'");
  auto [binding, inst] = it->second;
  live_.erase(it);
  kernel_.restore(inst.id, inst.post_init);
  idle_[{binding.gateway, binding.app}].push_back(inst);
}

std::optional<SessionBinding> SessionManager::find(const std::string& session_id) const {
  auto it = live_.find(session_id);
  if (it == live_.end()) return std::nullopt;
  return it->second.first;
}

std::vector<SessionBinding> SessionManager::live() const {
  std::vector<SessionBinding> out;
  for (const auto& [_, entry] : live_) out.push_back(entry.first);
  return out;
}

std::size_t SessionManager::idle(const EntityId& gateway, const std::string& app) const {
  auto it = idle_.find({gateway, app});
  return it == idle_.end() ? 0 : it->second.size();
}

}  // namespace camflow::scenario
