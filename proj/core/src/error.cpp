#include "eistwist/error.hpp"

namespace eistwist {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotInGroup: return "NotInGroup";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::ConvergenceViolated: return "ConvergenceViolated";
    case ErrorCode::PoleAt: return "PoleAt";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::Underflow: return "Underflow";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::UnknownGroup: return "UnknownGroup";
    case ErrorCode::UnsupportedLevel: return "UnsupportedLevel";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return 2;
    case ErrorCode::UnknownGroup: return 3;
    case ErrorCode::UnsupportedLevel: return 3;
    case ErrorCode::InvalidArgument: return 4;
    case ErrorCode::NotInGroup: return 5;
    case ErrorCode::IllConditioned: return 6;
    case ErrorCode::ConvergenceViolated: return 7;
    case ErrorCode::PoleAt: return 8;
    case ErrorCode::Overflow: return 9;
    case ErrorCode::Underflow: return 9;
    case ErrorCode::InsufficientData: return 10;
    case ErrorCode::IoError: return 11;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace eistwist
