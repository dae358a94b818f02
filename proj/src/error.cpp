#include "volcast/error.hpp"

namespace volcast {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonScalarLoss: return "NonScalarLoss";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::ZeroTarget: return "ZeroTarget";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& what, std::optional<std::size_t> line) {
  std::string out = to_string(code);
  if (line) out += " (line " + std::to_string(*line) + ")";
  out += ": ";
  out += what;
  return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& what, std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, what, line)), code_(code), line_(line) {}

}  // namespace volcast
