#ifndef MIXCRAFT_ERROR_HPP
#define MIXCRAFT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mixcraft {

enum class ErrorCode {
  NotPositiveDefinite,
  ZeroVariance,
  DimensionMismatch,
  ParseError,
  RaggedRows,
  ClassTooSmall,
  Unsupported,
  DegenerateRange,
  DuplicatePointsExceedK,
  EmptySelection,
  InvalidBracket,
  InvalidArgument,
  ZeroDensity,
  InsufficientN,
  InsufficientSupport,
  SingularConditional,
  LengthMismatch,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::DuplicatePointsExceedK: return "DuplicatePointsExceedK";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::InvalidBracket: return "InvalidBracket";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroDensity: return "ZeroDensity";
    case ErrorCode::InsufficientN: return "InsufficientN";
    case ErrorCode::InsufficientSupport: return "InsufficientSupport";
    case ErrorCode::SingularConditional: return "SingularConditional";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a code so callers can branch
/// without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Numerical failures map to exit code 1, everything else is usage/IO.
  bool is_numerical() const noexcept {
    switch (code_) {
      case ErrorCode::NotPositiveDefinite:
      case ErrorCode::ZeroVariance:
      case ErrorCode::ZeroDensity:
      case ErrorCode::InsufficientN:
      case ErrorCode::InsufficientSupport:
      case ErrorCode::SingularConditional:
      case ErrorCode::DuplicatePointsExceedK:
      case ErrorCode::EmptySelection:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
};

}  // namespace mixcraft

#endif  // MIXCRAFT_ERROR_HPP
