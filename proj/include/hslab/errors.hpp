#pragma once

#include <stdexcept>
#include <string>

namespace hslab {

enum class ErrorCode {
  InvalidArgument,
  NotPositiveDefinite,
  DimensionMismatch,
  ToleranceNotReached,
  IncompatibleSubdivision,
  EmptyPatch,
  PatchTooSmall,
  CellCountMismatch,
  BasisMismatch,
  IndexOutOfRange,
  DegenerateSample,
  CannotReachRatio,
  InsufficientSpread,
  DegenerateRecords,
  NonPositiveExponent,
  IoError,
};

/// Stable identifier for an error code, e.g. "NotPositiveDefinite".
const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace hslab
