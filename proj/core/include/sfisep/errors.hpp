#pragma once

#include <stdexcept>
#include <string>

namespace sfisep {

// Every throwing path in the library uses one of these codes. The code word is
// stable: the CLI prints it verbatim and maps it to an exit code, and tests
// match on it.
enum class ErrorCode {
  invalid_argument,
  geometry_too_small,
  shape_error,
  state_error,
  training_diverged,
  undefined_metric,
  bad_magic,
  unsupported_version,
  truncated_model,
  parse_error,
  unsupported_format,
  io_error,
};

const char* code_word(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(code_word(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace sfisep
