#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eistwist {

enum class ErrorCode {
  InvalidArgument,
  NotInGroup,
  IllConditioned,
  ConvergenceViolated,
  PoleAt,
  Overflow,
  Underflow,
  InsufficientData,
  UnknownGroup,
  UnsupportedLevel,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Process exit status used by the CLI for each error kind.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace eistwist
