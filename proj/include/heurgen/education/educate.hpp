#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heurgen/calibration/cmaes.hpp"
#include "heurgen/core/model.hpp"
#include "heurgen/core/structure.hpp"
#include "heurgen/education/evaluator.hpp"
#include "heurgen/llm/gateway.hpp"
#include "heurgen/prompts/kit.hpp"

namespace heurgen::education {

struct EducationConfig {
  int mc_func_pop = 3;  // m, candidates per slot
  int max_fix_try = 3;
  bool calibration = true;
  bool one_shot = false;
  std::int64_t calibration_evals = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CandidateRecord {
  int candidate_idx = 0;
  std::string status;  // "ok", a sandbox status, or "unparseable"
  std::optional<double> quality;
  int fix_rounds = 0;
};

struct SlotSearchRecord {
  core::IndividualId individual_id = 0;
  int slot_id = 0;  // 0 in one-shot mode
  std::vector<CandidateRecord> candidates;
  int chosen_index = -1;
};

nlohmann::json to_json(const SlotSearchRecord& record);

struct EducationResult {
  core::HeuristicIndividual individual;
  std::vector<SlotSearchRecord> records;
  std::optional<double> first_success_quality;
  std::optional<calibration::CalibrationResult> calibration;
  bool budget_exhausted = false;
  bool skipped = false;  // already evaluated on entry
};

struct EducationDeps {
  llm::Gateway* gateway = nullptr;
  llm::RunBudget* budget = nullptr;
  const prompts::PromptKit* kit = nullptr;
  Evaluator* evaluator = nullptr;
  problems::ProblemKind kind = problems::ProblemKind::kTsp;
  std::function<prompts::PromptContext()> context;
  std::function<core::KnowledgeView()> knowledge;
  std::function<void(const nlohmann::json&)> log;
  core::ParseOptions parse;
};

/// A realized program state: structure plus slot implementations.
struct ProgramState {
  core::StructureCode structure;
  std::map<int, core::FunctionImpl> impls;
};

struct FixResult {
  ProgramState state;
  Evaluation evaluation;
  int rounds = 0;
};

class Educator {
 public:
  Educator(EducationConfig cfg, EducationDeps deps);

  /// Greedy per-slot realization, fixing, then calibration. Throws
  /// all_candidates_failed, or budget_exhausted when nothing complete exists.
  EducationResult educate(core::HeuristicIndividual individual);

  /// Assembled program with the problem driver appended; assembly problems
  /// surface as a runtime_error report instead of an exception.
  std::string build_program(const ProgramState& state, std::optional<sandbox::EvaluationReport>* assembly_failure) const;
  Evaluation evaluate_state(const ProgramState& state, Split split) const;

  /// Up to max_fix_try repair rounds; slots in `frozen` and MAX_TIME must come
  /// back unchanged. Throws fix_budget_exhausted.
  FixResult fix(ProgramState state, Evaluation failing, const std::vector<int>& frozen, core::HeuristicIndividual& owner);

 private:
  std::optional<FixResult> evaluate_with_fixing(ProgramState state, const std::vector<int>& frozen,
                                                core::HeuristicIndividual& owner, CandidateRecord& record);
  llm::ChatResponse ask(const prompts::ChatPrompt& prompt, llm::Tag tag, core::HeuristicIndividual& owner);
  void calibrate(EducationResult& result);
  void emit(const nlohmann::json& event) const;

  EducationConfig cfg_;
  EducationDeps deps_;
};

/// True when a `def` consists only of comments, a docstring, `pass` or `...`.
bool is_stub_definition(std::string_view def_source);

}  // namespace heurgen::education
