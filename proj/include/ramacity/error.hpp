#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ramacity {

enum class ErrorCode {
  DegenerateView,
  HeightExceedsRadius,
  NotInvertible,
  OutOfDomain,
  BadPolygon,
  ParseError,
  TargetUnresolvable,
  EmptyLog,
  DegenerateInput,
  ScriptError,
  ConfigError,
  IoError,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateView: return "DegenerateView";
    case ErrorCode::HeightExceedsRadius: return "HeightExceedsRadius";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::BadPolygon: return "BadPolygon";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TargetUnresolvable: return "TargetUnresolvable";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::ScriptError: return "ScriptError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for the library. `index` carries the offending
/// element (vertex, feature, script line) when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace ramacity
