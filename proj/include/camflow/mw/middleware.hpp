#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "camflow/decision.hpp"
#include "camflow/mw/message.hpp"
#include "camflow/sim/kernel.hpp"

namespace camflow::mw {

/// Stand-in for a certificate binding an entity to its tags.
struct TagAssertion {
  EntityId entity;
  std::vector<Tag> tags;  // claimed S ∪ I
  std::string issuer;
};

/// Local access-control predicate of one endpoint, consulted with the peer's
/// identity and current context.
using AccessPolicy =
    std::function<bool(const EntityId& local, const EntityId& remote, const SecurityContext&)>;

using ConnectionId = std::uint64_t;
using MessageId = std::uint64_t;

enum class ConnectionStatus : std::uint8_t { established, refused };

struct Connection {
  ConnectionId id = 0;
  EntityId a;
  EntityId b;
  EventId established_at = 0;  // id of the connect event
  ConnectionStatus status = ConnectionStatus::refused;
  bool bidirectional = false;
  Decision decision;
};

struct SendResult {
  Decision decision;
  MessageId message_id = 0;
  Message delivered;  // after send-side stripping
  std::vector<std::string> stripped;
};

struct ReceiveResult {
  MessageId message_id = 0;
  EntityId sender;
  Message message;  // after both stripping passes
  std::vector<std::string> stripped;  // nulled by the receive pass only
};

class Middleware {
 public:
  explicit Middleware(sim::Kernel& kernel);

  Middleware(const Middleware&) = delete;
  Middleware& operator=(const Middleware&) = delete;

  void define_schema(MessageSchema schema);
  const MessageSchema& schema(const std::string& name) const;
  bool has_schema(const std::string& name) const;

  /// `proxy` must be a trusted process on the endpoint's machine and every
  /// asserted tag must be issued by the kernel's naming authority.
  void register_endpoint(const EntityId& entity, const EntityId& proxy, TagAssertion assertion,
                         AccessPolicy policy = {});
  bool registered(const EntityId& entity) const;

  /// Entity-level traffic runs a -> b, and also b -> a when `bidirectional`.
  /// A refused connection is returned (and logged), never thrown.
  Connection connect(const EntityId& a, const EntityId& b, bool bidirectional = false);
  Connection connection(ConnectionId id) const;

  SendResult send(const EntityId& sender, ConnectionId conn, const Message& msg);
  /// Throws empty_queue when nothing is pending for `receiver`.
  ReceiveResult receive(const EntityId& receiver, ConnectionId conn);
  std::size_t pending(const EntityId& receiver, ConnectionId conn) const;

  /// Labels a free attribute on behalf of `producer` (see the free function).
  Message label_attribute(const EntityId& producer, Message msg, const std::string& attribute,
                          const SecurityContext& label) const;

 private:
  struct Registration {
    EntityId proxy;
    TagAssertion assertion;
    AccessPolicy policy;
  };
  struct InFlight {
    MessageId id = 0;
    EntityId sender;
    SecurityContext sender_context;
    Message message;
  };
  struct Channel {
    Connection info;
    std::mutex mu;
    std::deque<InFlight> to_a;
    std::deque<InFlight> to_b;
  };

  Channel& channel(ConnectionId id) const;
  Decision assertion_matches(const EntityId& entity, const Registration& reg) const;

  sim::Kernel& kernel_;
  mutable std::mutex mu_;
  std::map<std::string, MessageSchema> schemas_;
  std::map<EntityId, Registration> endpoints_;
  std::map<ConnectionId, std::unique_ptr<Channel>> channels_;
  ConnectionId next_connection_ = 1;
  MessageId next_message_ = 1;
};

}  // namespace camflow::mw
