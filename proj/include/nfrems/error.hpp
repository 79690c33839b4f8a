#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nfrems {

enum class ErrorCode {
  PoleAmbiguity,
  SingularTransform,
  FeedbackSingular,
  DimensionMismatch,
  SingularPoint,
  GridTooClose,
  QuadratureUnderresolved,
  OutOfRange,
  NonMonotonicPhase,
  CoincidentPoint,
  ZeroVector,
  InvalidParams,
  PointInsideObstacle,
  ZeroEntry,
  NoConvergence,
  NonFiniteObjective,
  ZeroDenominator,
  ParseError,
  NonMonotonicFrequency,
  UnsupportedParameterType,
  IoError,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PoleAmbiguity: return "PoleAmbiguity";
    case ErrorCode::SingularTransform: return "SingularTransform";
    case ErrorCode::FeedbackSingular: return "FeedbackSingular";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::GridTooClose: return "GridTooClose";
    case ErrorCode::QuadratureUnderresolved: return "QuadratureUnderresolved";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonMonotonicPhase: return "NonMonotonicPhase";
    case ErrorCode::CoincidentPoint: return "CoincidentPoint";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::PointInsideObstacle: return "PointInsideObstacle";
    case ErrorCode::ZeroEntry: return "ZeroEntry";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotonicFrequency: return "NonMonotonicFrequency";
    case ErrorCode::UnsupportedParameterType: return "UnsupportedParameterType";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  // Parse failures point at a 1-based input line.
  Error(ErrorCode code, std::size_t line, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": line " + std::to_string(line) + ": " + what),
        code_(code),
        line_(line) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_ = 0;
};

// Non-fatal diagnostics (active loads, failed passivity on ingest, ...).
using WarningHandler = std::function<void(std::string_view)>;

inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

inline void set_warning_handler(WarningHandler handler) { warning_handler() = std::move(handler); }

inline void warn(std::string_view msg) {
  if (warning_handler()) warning_handler()(msg);
}

}  // namespace nfrems
