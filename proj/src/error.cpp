#include "genet/error.hpp"

namespace genet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MALFORMED_DOCUMENT";
    case ErrorCode::kSchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::kInvariantViolation: return "INVARIANT_VIOLATION";
    case ErrorCode::kDivisibility: return "DIVISIBILITY";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kMalformedRow: return "MALFORMED_ROW";
    case ErrorCode::kDuplicateKey: return "DUPLICATE_KEY";
    case ErrorCode::kMissingKey: return "MISSING_KEY";
    case ErrorCode::kBadMagic: return "BAD_MAGIC";
    case ErrorCode::kTruncated: return "TRUNCATED";
    case ErrorCode::kDimOverflow: return "DIM_OVERFLOW";
    case ErrorCode::kBadDims: return "BAD_DIMS";
    case ErrorCode::kTrailingBytes: return "TRAILING_BYTES";
    case ErrorCode::kNonfiniteInput: return "NONFINITE_INPUT";
    case ErrorCode::kZeroKernel: return "ZERO_KERNEL";
    case ErrorCode::kEmptyRange: return "EMPTY_RANGE";
    case ErrorCode::kOutOfRangeAccuracy: return "OUT_OF_RANGE_ACCURACY";
    case ErrorCode::kInvalidTrial: return "INVALID_TRIAL";
    case ErrorCode::kNoTrials: return "NO_TRIALS";
    case ErrorCode::kStructureMismatch: return "STRUCTURE_MISMATCH";
    case ErrorCode::kUnfittedType: return "UNFITTED_TYPE";
    case ErrorCode::kNoFeasibleCandidate: return "NO_FEASIBLE_CANDIDATE";
    case ErrorCode::kIoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

namespace {

std::string compose(ErrorCode code, const std::string& message, std::optional<int> index) {
  std::string out(to_string(code));
  if (index) {
    out += " [" + std::to_string(*index) + "]";
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<int> index)
    : std::runtime_error(compose(code, message, index)), code_(code), index_(index) {}

}  // namespace genet
