#pragma once

#include <stdexcept>
#include <string>

namespace ppursuit {

// Every failure raised by the core carries one of these codes. The C API maps
// them one-to-one onto ppursuit_status values.
enum class ErrorCode {
  kDomain,              // argument outside a function's domain
  kParam,               // invalid parameter in a spec or distribution
  kSupport,             // q not absolutely continuous w.r.t. p on the grid
  kDimensionMismatch,
  kZeroDirection,
  kSingularCovariance,
  kDegenerateConstraint,
  kDegenerateAxis,
  kTooFewRetained,
  kFloorViolation,
  kZeroVariance,
  kDegenerateWeights,
  kBasisDegenerate,
  kStructureMismatch,
  kDegeneratePredictor,
  kParse,
  kEmptyData,
  kConfig,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Row/column are 1-based as a user would count them in a spreadsheet.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : Error(ErrorCode::kParse, what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kParam: return "ParamError";
    case ErrorCode::kSupport: return "SupportError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroDirection: return "ZeroDirection";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kDegenerateConstraint: return "DegenerateConstraint";
    case ErrorCode::kDegenerateAxis: return "DegenerateAxis";
    case ErrorCode::kTooFewRetained: return "TooFewRetained";
    case ErrorCode::kFloorViolation: return "FloorViolation";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kDegenerateWeights: return "DegenerateWeights";
    case ErrorCode::kBasisDegenerate: return "BasisDegenerate";
    case ErrorCode::kStructureMismatch: return "StructureMismatch";
    case ErrorCode::kDegeneratePredictor: return "DegeneratePredictor";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kEmptyData: return "EmptyData";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
  }
  return "UnknownError";
}

}  // namespace ppursuit
