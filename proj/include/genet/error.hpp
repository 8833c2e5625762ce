#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace genet {

enum class ErrorCode {
  // structure-core
  kMalformedDocument,
  kSchemaViolation,
  kInvariantViolation,
  // cost-model
  kDivisibility,
  kEmptyInput,
  kMalformedRow,
  kDuplicateKey,
  kMissingKey,
  // rank-analyzer
  kBadMagic,
  kTruncated,
  kDimOverflow,
  kBadDims,
  kTrailingBytes,
  kNonfiniteInput,
  kZeroKernel,
  // llr-nas
  kEmptyRange,
  kOutOfRangeAccuracy,
  kInvalidTrial,
  kNoTrials,
  kStructureMismatch,
  kUnfittedType,
  kNoFeasibleCandidate,
  // shared
  kIoError,
};

/// Stable identifier printed on the diagnostic stream, e.g. "MISSING_KEY".
std::string_view to_string(ErrorCode code);

/// Domain error. `index()` names the offending super-block (or row, for CSV
/// inputs) when the failure is attributable to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<int> index = std::nullopt);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] std::optional<int> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<int> index_;
};

}  // namespace genet
