#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heurgen {

enum class ErrorCode {
  // core-model
  kParseError,
  kMissingHyperMarkers,
  kMissingMaxTime,
  kMissingSlots,
  kTooManySlots,
  kInvalidHyperValue,
  kAssemblyError,
  kUnresolvedKnowledgeReference,
  kDuplicateDefinition,
  kUnevaluatedOperand,
  // llm-gateway
  kBudgetExhausted,
  kHttpError,
  kMalformedProviderResponse,
  kEmptyCompletion,
  kTranscriptExhausted,
  kTranscriptMismatch,
  // prompt-kit
  kMissingPlaceholder,
  kUnknownTemplate,
  kUnevaluatedParent,
  kEmptyPopulation,
  // exterior-ga
  kAllCandidatesUnparseable,
  kEmptyAfterFiltering,
  // interior-mcts
  kAllCandidatesFailed,
  kFixBudgetExhausted,
  kEvaluationError,
  // adaptive-memory
  kEmptyBatch,
  kNamingFailure,
  // sandbox
  kSandboxSetupFailure,
  // problem-suite
  kUnsupportedSize,
  kSchemaMismatch,
  kInvalidSolution,
  kZeroReference,
  kSizeExceedsOracle,
  kMissingReferenceFile,
  // calibration
  kNoDictFound,
  kNonFiniteObjective,
  kDimensionMismatch,
  kInvalidArgument,
  // knowledge-store
  kDuplicateName,
  kMalformedEntry,
  kLoadError,
  // cli-reporting
  kConfigInvalid,
  kMissingLog,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error class alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace heurgen
