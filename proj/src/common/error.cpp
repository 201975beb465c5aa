#include "heurgen/common/error.hpp"

namespace heurgen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kMissingHyperMarkers: return "missing_hyper_markers";
    case ErrorCode::kMissingMaxTime: return "missing_max_time";
    case ErrorCode::kMissingSlots: return "missing_slots";
    case ErrorCode::kTooManySlots: return "too_many_slots";
    case ErrorCode::kInvalidHyperValue: return "invalid_hyper_value";
    case ErrorCode::kAssemblyError: return "assembly_error";
    case ErrorCode::kUnresolvedKnowledgeReference: return "unresolved_knowledge_reference";
    case ErrorCode::kDuplicateDefinition: return "duplicate_definition";
    case ErrorCode::kUnevaluatedOperand: return "unevaluated_operand";
    case ErrorCode::kBudgetExhausted: return "budget_exhausted";
    case ErrorCode::kHttpError: return "http_error";
    case ErrorCode::kMalformedProviderResponse: return "malformed_provider_response";
    case ErrorCode::kEmptyCompletion: return "empty_completion";
    case ErrorCode::kTranscriptExhausted: return "transcript_exhausted";
    case ErrorCode::kTranscriptMismatch: return "transcript_mismatch";
    case ErrorCode::kMissingPlaceholder: return "missing_placeholder";
    case ErrorCode::kUnknownTemplate: return "unknown_template";
    case ErrorCode::kUnevaluatedParent: return "unevaluated_parent";
    case ErrorCode::kEmptyPopulation: return "empty_population";
    case ErrorCode::kAllCandidatesUnparseable: return "all_candidates_unparseable";
    case ErrorCode::kEmptyAfterFiltering: return "empty_after_filtering";
    case ErrorCode::kAllCandidatesFailed: return "all_candidates_failed_for_slot";
    case ErrorCode::kFixBudgetExhausted: return "fix_budget_exhausted";
    case ErrorCode::kEvaluationError: return "evaluation_error";
    case ErrorCode::kEmptyBatch: return "empty_batch";
    case ErrorCode::kNamingFailure: return "naming_failure";
    case ErrorCode::kSandboxSetupFailure: return "sandbox_setup_failure";
    case ErrorCode::kUnsupportedSize: return "unsupported_size";
    case ErrorCode::kSchemaMismatch: return "schema_mismatch";
    case ErrorCode::kInvalidSolution: return "invalid_solution";
    case ErrorCode::kZeroReference: return "zero_reference";
    case ErrorCode::kSizeExceedsOracle: return "size_exceeds_oracle";
    case ErrorCode::kMissingReferenceFile: return "missing_reference_file";
    case ErrorCode::kNoDictFound: return "no_dict_found";
    case ErrorCode::kNonFiniteObjective: return "non_finite_objective";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDuplicateName: return "duplicate_name";
    case ErrorCode::kMalformedEntry: return "malformed_entry";
    case ErrorCode::kLoadError: return "load_error";
    case ErrorCode::kConfigInvalid: return "config_invalid";
    case ErrorCode::kMissingLog: return "missing_log";
    case ErrorCode::kIoError: return "io_error";
  }
  return "unknown_error";
}

}  // namespace heurgen
