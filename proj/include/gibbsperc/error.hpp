#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gperc {

enum class ErrorCode {
  DivergentTail,
  NoWindow,
  OutOfDomain,
  PreconditionViolated,
  ConfigError,
  EmptyInput,
  EmptyGrid,
  ContourTooShort,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::DivergentTail: return "DivergentTail";
  case ErrorCode::NoWindow: return "NoWindow";
  case ErrorCode::OutOfDomain: return "OutOfDomain";
  case ErrorCode::PreconditionViolated: return "PreconditionViolated";
  case ErrorCode::ConfigError: return "ConfigError";
  case ErrorCode::EmptyInput: return "EmptyInput";
  case ErrorCode::EmptyGrid: return "EmptyGrid";
  case ErrorCode::ContourTooShort: return "ContourTooShort";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported through this type;
/// the code lets callers (the CLI in particular) map failures to exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace gperc
