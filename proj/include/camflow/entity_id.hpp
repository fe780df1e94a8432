#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace camflow {

/// Globally unique entity handle: machine name plus a per-machine serial.
struct EntityId {
  std::string machine;
  std::uint64_t local = 0;

  friend bool operator==(const EntityId&, const EntityId&) = default;
  friend std::strong_ordering operator<=>(const EntityId& a, const EntityId& b) {
    if (auto c = a.machine.compare(b.machine); c != 0) return c <=> 0;
    return a.local <=> b.local;
  }
};

/// "machine:local"
std::string to_string(const EntityId& id);
/// Inverse of to_string; splits at the last ':'. Throws malformed_record.
EntityId parse_entity_id(const std::string& text);

using EventId = std::uint64_t;

}  // namespace camflow

template <>
struct std::hash<camflow::EntityId> {
  std::size_t operator()(const camflow::EntityId& id) const noexcept {
    return std::hash<std::string>{}(id.machine) * 31 + std::hash<std::uint64_t>{}(id.local);
  }
};
