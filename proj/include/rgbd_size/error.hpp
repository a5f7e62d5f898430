// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rgbd {

enum class ErrorCode {
  NonPositiveDepth,
  EmptyTrajectory,
  EmptySparseCloud,
  DegenerateInput,
  EmptyRegion,
  InsufficientForeground,
  SpecInvalid,
  MissingFile,
  ParseError,
  InvariantViolation,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::EmptySparseCloud: return "EmptySparseCloud";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::InsufficientForeground: return "InsufficientForeground";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message holds the detail (file name, field name, line number).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rgbd
