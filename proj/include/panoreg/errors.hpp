#pragma once

#include <stdexcept>
#include <string>

namespace panoreg {

// Stable error taxonomy. CLI exit codes are derived from these:
// registration failures (TooFewPairs, NoConsensus) map to exit 2,
// everything else to exit 1.
enum class ErrorCode {
  kNonPositiveHeight,
  kNonPositiveDepth,
  kDegenerateBoundary,
  kLengthMismatch,
  kEmptyInput,
  kGenerationFailed,
  kCameraOutsideRoom,
  kNoIntersection,
  kTooFewPairs,
  kDegenerateConfiguration,
  kNoConsensus,
  kClippingFailure,
  kIoError,
  kSchemaError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveHeight: return "NonPositiveHeight";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kDegenerateBoundary: return "DegenerateBoundary";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kCameraOutsideRoom: return "CameraOutsideRoom";
    case ErrorCode::kNoIntersection: return "NoIntersection";
    case ErrorCode::kTooFewPairs: return "TooFewPairs";
    case ErrorCode::kDegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::kNoConsensus: return "NoConsensus";
    case ErrorCode::kClippingFailure: return "ClippingFailure";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSchemaError: return "SchemaError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

  bool is_registration_failure() const {
    return code_ == ErrorCode::kTooFewPairs || code_ == ErrorCode::kNoConsensus;
  }

 private:
  ErrorCode code_;
};

}  // namespace panoreg
