#pragma once

#include <string>
#include <utility>
#include <vector>

#include "camflow/ifc.hpp"

namespace camflow {

/// Outcome of a mediated operation. A denial is a value that is returned to
/// the caller and recorded in the audit log; it is never thrown.
struct Decision {
  bool allowed = true;
  std::string reason;  // e.g. "secrecy", "missing-privilege", "coi-violation"
  std::vector<Tag> offending;
  std::string detail;

  explicit operator bool() const noexcept { return allowed; }

  static Decision allow() { return {}; }
  static Decision deny(std::string reason, std::vector<Tag> offending = {},
                       std::string detail = {}) {
    return Decision{false, std::move(reason), std::move(offending), std::move(detail)};
  }
  static Decision from_flow(const FlowDecision& flow) {
    if (flow.allowed) return allow();
    auto offending = flow.secrecy_excess;
    offending.insert(offending.end(), flow.integrity_missing.begin(), flow.integrity_missing.end());
    return deny(flow.reason(), std::move(offending));
  }
};

}  // namespace camflow
