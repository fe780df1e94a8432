#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace camflow {

/// Structural failures raised by the library. Policy denials are not errors:
/// they are returned as decision values and recorded in the audit log.
enum class Errc {
  passive_entity,
  missing_privilege,
  kind_mismatch,
  not_owned,
  coi_violation,
  unknown_tag,
  duplicate_name,
  unknown_entity,
  unknown_machine,
  cross_machine,
  untrusted_actor,
  checkpoint_mismatch,
  unknown_endpoint,
  not_endpoint,
  not_established,
  schema_violation,
  fixed_label,
  empty_queue,
  malformed_record,
  io_error,
  unauthorised,
  invalid_argument,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace camflow
