#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace volcast {

enum class ErrorCode {
  MissingFile,
  MalformedRow,
  NonMonotoneDates,
  DimensionMismatch,
  MalformedRecord,
  EmptyIntersection,
  InsufficientRows,
  InsufficientHistory,
  KOutOfRange,
  ShapeMismatch,
  NonScalarLoss,
  DegenerateWindow,
  DivergedLoss,
  ZeroTarget,
  NonPositiveInput,
  EmptyTestSet,
  InvalidSpec,
  InvalidConfig,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure,
/// `line()` carries the 1-based input line for parse errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace volcast
