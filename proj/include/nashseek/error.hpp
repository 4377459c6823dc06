#pragma once

#include <stdexcept>
#include <string>

namespace nashseek {

enum class ErrorCode {
  DimensionMismatch,
  InvalidGraph,
  SingularLyapunov,
  NotStronglyConnected,
  NoConvergence,
  EmptyGains,
  NotHurwitz,
  SingularSystem,
  Diverged,
  ConfigInvalid,
  EmptyWindow,
  NonPositiveError,
};

[[nodiscard]] constexpr const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::SingularLyapunov: return "SingularLyapunov";
    case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptyGains: return "EmptyGains";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::NonPositiveError: return "NonPositiveError";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nashseek
