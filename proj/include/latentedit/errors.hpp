#pragma once

#include <stdexcept>
#include <string>

namespace latentedit {

enum class errc {
  invalid_argument,
  shape_mismatch,
  non_finite,
  bad_magic,
  bad_version,
  bad_dtype,
  truncated_payload,
  io_failure,
  config_parse,
  config_unknown_key,
  config_invalid_value,
};

/// All library failures surface as this exception; `code()` identifies the
/// failure class for programmatic handling.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace latentedit
