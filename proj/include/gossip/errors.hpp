#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gossip {

enum class ErrorCode {
  InvalidArgument,
  RoundRegression,
  Infeasible,
  SchedulingDeadlock,
  ActionOutOfRange,
  ProtocolMismatch,
  InvalidTone,
  NoClaim,
  MissingVariable,
  Transport,
  AuthMissing,
  Timeout,
  Malformed,
  SchemaViolation,
  OutOfRange,
  Unabstractable,
  DivisionByZero,
  ReplayIncomplete,
  ReplayMismatch,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so callers
// (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RoundRegression: return "RoundRegression";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::SchedulingDeadlock: return "SchedulingDeadlock";
    case ErrorCode::ActionOutOfRange: return "ActionOutOfRange";
    case ErrorCode::ProtocolMismatch: return "ProtocolMismatch";
    case ErrorCode::InvalidTone: return "InvalidTone";
    case ErrorCode::NoClaim: return "NoClaim";
    case ErrorCode::MissingVariable: return "MissingVariable";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::Unabstractable: return "Unabstractable";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::ReplayIncomplete: return "ReplayIncomplete";
    case ErrorCode::ReplayMismatch: return "ReplayMismatch";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace gossip
