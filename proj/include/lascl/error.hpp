#pragma once

#include <stdexcept>
#include <string>

namespace lascl {

enum class ErrorCode {
  DuplicateClass,
  PrefixConflict,
  EmptyPath,
  LeafCollision,
  UnknownClass,
  DepthOutOfRange,
  UnresolvedPlaceholder,
  ParseError,
  EmptyDataset,
  ShapeMismatch,
  SingleClass,
  InsufficientData,
  EmptyProbeSet,
  InvalidArgument,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateClass: return "DuplicateClass";
    case ErrorCode::PrefixConflict: return "PrefixConflict";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::LeafCollision: return "LeafCollision";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::DepthOutOfRange: return "DepthOutOfRange";
    case ErrorCode::UnresolvedPlaceholder: return "UnresolvedPlaceholder";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyProbeSet: return "EmptyProbeSet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// All recoverable failures surface as this exception; code() lets callers
// branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lascl
