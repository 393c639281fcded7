#pragma once

#include <stdexcept>
#include <string>

namespace vzcert {

enum class errc {
  invalid_spec,
  foreign_element,
  resource_limit,
  indeterminate,
  out_of_range,
  ball_too_small,
  inconclusive,
  not_found,
  precondition,
  too_large,
  no_repeat,
  not_flow_preserving,
  no_cycle,
  lift_mismatch,
  invalid_flow,
};

const char* errc_name(errc c);

// Single exception type; code() tells callers which contract was violated.
// Pipelines catch these at stage boundaries and turn them into verdicts.
class error : public std::runtime_error {
public:
  error(errc c, const std::string& what)
      : std::runtime_error(std::string(errc_name(c)) + ": " + what), code_(c) {}
  errc code() const { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc c, const std::string& what) { throw error(c, what); }

}  // namespace vzcert
