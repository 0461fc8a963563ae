#include "hslab/errors.hpp"

namespace hslab {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ToleranceNotReached: return "ToleranceNotReached";
    case ErrorCode::IncompatibleSubdivision: return "IncompatibleSubdivision";
    case ErrorCode::EmptyPatch: return "EmptyPatch";
    case ErrorCode::PatchTooSmall: return "PatchTooSmall";
    case ErrorCode::CellCountMismatch: return "CellCountMismatch";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::CannotReachRatio: return "CannotReachRatio";
    case ErrorCode::InsufficientSpread: return "InsufficientSpread";
    case ErrorCode::DegenerateRecords: return "DegenerateRecords";
    case ErrorCode::NonPositiveExponent: return "NonPositiveExponent";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_name(code)) + ": " + what);
}

}  // namespace hslab
