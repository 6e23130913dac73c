#pragma once

#include <stdexcept>
#include <string>

namespace bugclass {

enum class ErrorCode {
  MissingColumn,
  BadTimestamp,
  BadLabel,
  DuplicateId,
  MissingText,
  MissingTimestamp,
  HttpError,
  NotFound,
  IoError,
  ParseError,
  DegenerateClass,
  SingleClass,
  LengthMismatch,
  InvalidArgument,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingText: return "MissingText";
    case ErrorCode::MissingTimestamp: return "MissingTimestamp";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace bugclass
