#pragma once

#include <stdexcept>
#include <string>

namespace ca {

enum class ErrorCode {
  invalid_argument,
  parse,
  validation,
  io,
  transport,
  credentials,
  state,
  unsupported,
  internal,
};

const char* error_code_name(ErrorCode code);

/// Single exception type for the whole library; the C boundary maps
/// ErrorCode onto the ca_status values of the public header.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ca
