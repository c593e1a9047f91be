#pragma once

#include <stdexcept>
#include <string>

namespace mfsync {

enum class ErrorKind {
  NoConvergence,
  ZeroMatrix,
  RankDeficient,
  NotHermitian,
  DisconnectedAfterRetries,
  GridTooCoarse,
  LengthMismatch,
  UnsupportedDegree,
  PreconditionViolation,
  DivergenceDetected,
  ConfigError,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ZeroMatrix: return "ZeroMatrix";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DisconnectedAfterRetries: return "DisconnectedAfterRetries";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` carries the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix, for rethrowing with more context.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace mfsync
