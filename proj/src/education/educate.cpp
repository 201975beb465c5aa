#include "heurgen/education/educate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"
#include "heurgen/problems/binding.hpp"

namespace heurgen::education {

using nlohmann::json;

void EducationConfig::validate() const {
  if (mc_func_pop < 1) throw Error(ErrorCode::kConfigInvalid, "education.mc_func_pop must be at least 1");
  if (max_fix_try < 0) throw Error(ErrorCode::kConfigInvalid, "education.max_fix_try must be non-negative");
  if (calibration_evals < 0) throw Error(ErrorCode::kConfigInvalid, "education.calibration_evals must be non-negative");
}

json to_json(const SlotSearchRecord& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) {
    cands.push_back({{"candidate_idx", c.candidate_idx},
                     {"status", c.status},
                     {"quality", c.quality ? json(*c.quality) : json(nullptr)},
                     {"fix_rounds", c.fix_rounds}});
  }
  return {{"individual_id", r.individual_id}, {"slot_id", r.slot_id}, {"candidates", cands}, {"chosen_index", r.chosen_index}};
}

bool is_stub_definition(std::string_view def_source) {
  auto lines = text::split_lines(def_source);
  std::size_t header_end = 0;
  int depth = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (char c : lines[i]) depth += c == '(' ? 1 : c == ')' ? -1 : 0;
    header_end = i;
    if (depth <= 0) break;
  }
  bool in_doc = false;
  std::string_view quote;
  for (std::size_t i = header_end + 1; i < lines.size(); ++i) {
    auto t = text::trim(lines[i]);
    if (in_doc) {
      if (text::contains(t, quote)) in_doc = false;
      continue;
    }
    if (t.empty() || t.front() == '#' || t == "pass" || t == "...") continue;
    if (text::starts_with(t, "\"\"\"") || text::starts_with(t, "'''")) {
      quote = t.substr(0, 3);
      in_doc = !text::contains(t.substr(3), quote);
      continue;
    }
    return false;
  }
  // a def whose header carries the body inline, e.g. `def f(x): return x`
  if (!lines.empty()) {
    auto header = text::trim(lines[header_end]);
    auto colon = header.rfind(':');
    if (colon != std::string_view::npos) {
      auto inline_body = text::trim(header.substr(colon + 1));
      if (!inline_body.empty() && inline_body.front() != '#' && inline_body != "pass" && inline_body != "...")
        return false;
    }
  }
  return true;
}

namespace {

json quality_json(const std::optional<double>& q) { return q ? json(*q) : json(nullptr); }

std::string status_of(const Evaluation& ev) {
  if (ev.ok()) return "ok";
  return ev.failure ? std::string(sandbox::to_string(ev.failure->status)) : std::string("runtime_error");
}

bool fixable(const Evaluation& ev) {
  if (ev.ok() || !ev.failure) return false;
  auto s = ev.failure->status;
  return s == sandbox::Status::kCompileError || s == sandbox::Status::kRuntimeError ||
         s == sandbox::Status::kConstraintViolation;
}

std::optional<std::string> implemented_slot(std::string_view code, int slot_id) {
  auto defs = core::extract_slot_definitions(code);
  auto it = defs.find(slot_id);
  if (it == defs.end() || is_stub_definition(it->second)) return std::nullopt;
  return it->second;
}

std::vector<int> slot_ids(const core::StructureCode& s) {
  std::vector<int> ids;
  for (const auto& slot : s.slots) ids.push_back(slot.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

Educator::Educator(EducationConfig cfg, EducationDeps deps) : cfg_(cfg), deps_(std::move(deps)) {
  cfg_.validate();
  if (!deps_.gateway || !deps_.budget || !deps_.kit || !deps_.evaluator || !deps_.context || !deps_.knowledge)
    throw Error(ErrorCode::kInvalidArgument, "education dependencies are incomplete");
}

void Educator::emit(const json& event) const {
  if (deps_.log) deps_.log(event);
}

llm::ChatResponse Educator::ask(const prompts::ChatPrompt& prompt, llm::Tag tag, core::HeuristicIndividual& owner) {
  auto r = deps_.gateway->complete({prompt.system, prompt.user, tag, std::nullopt}, *deps_.budget);
  owner.token_cost += r.total_tokens();
  return r;
}

std::string Educator::build_program(const ProgramState& state,
                                    std::optional<sandbox::EvaluationReport>* assembly_failure) const {
  core::HeuristicIndividual probe;
  probe.structure = state.structure;
  probe.impls = state.impls;
  try {
    return core::assemble(probe, deps_.knowledge()) + problems::driver_suffix(deps_.kind);
  } catch (const Error& e) {
    if (assembly_failure) {
      sandbox::EvaluationReport r;
      r.status = sandbox::Status::kRuntimeError;
      r.details = e.what();
      r.stderr_tail = e.what();
      *assembly_failure = r;
    }
    return {};
  }
}

Evaluation Educator::evaluate_state(const ProgramState& state, Split split) const {
  std::optional<sandbox::EvaluationReport> failure;
  auto program = build_program(state, &failure);
  if (failure) {
    Evaluation ev;
    ev.failure = failure;
    return ev;
  }
  return deps_.evaluator->evaluate(program, split);
}

FixResult Educator::fix(ProgramState state, Evaluation failing, const std::vector<int>& frozen,
                        core::HeuristicIndividual& owner) {
  FixResult result{std::move(state), std::move(failing), 0};
  const auto* max_time = result.state.structure.find_hyper(core::kMaxTimeName);
  const std::string max_time_literal = max_time ? max_time->literal : std::string();
  while (!result.evaluation.ok()) {
    if (!fixable(result.evaluation) || result.rounds >= cfg_.max_fix_try) {
      throw Error(ErrorCode::kFixBudgetExhausted,
                  fmt::format("{} after {} fix rounds", status_of(result.evaluation), result.rounds));
    }
    ++result.rounds;
    const std::string shown = core::realize(result.state.structure, result.state.impls);
    auto ctx = deps_.context();
    auto reply = ask(prompts::fix_prompt(*deps_.kit, ctx, result.evaluation.failure->error_message(), shown),
                     llm::Tag::kFixing, owner);
    std::string violation;
    std::optional<core::Decomposed> fixed;
    try {
      auto code = llm::extract_code_block(reply.text).code;
      fixed = core::decompose(code, deps_.parse);
    } catch (const Error& e) {
      violation = e.what();
    }
    if (fixed) {
      const auto* mt = fixed->structure.find_hyper(core::kMaxTimeName);
      if (!mt || mt->literal != max_time_literal) {
        violation = "MAX_TIME was changed";
      } else if (slot_ids(fixed->structure) != slot_ids(result.state.structure)) {
        violation = "function slots were added or removed";
      } else {
        for (const auto& hp : result.state.structure.hyper_block) {
          if (!fixed->structure.find_hyper(hp.name)) violation = fmt::format("hyperparameter {} was removed", hp.name);
        }
        for (int id : frozen) {
          auto a = result.state.impls.find(id);
          auto b = fixed->impls.find(id);
          if (a == result.state.impls.end()) continue;
          if (b == fixed->impls.end() || text::trim(a->second.source) != text::trim(b->second.source))
            violation = fmt::format("committed func_{} was modified", id);
        }
      }
    }
    emit({{"event", "fix_round"},
          {"individual_id", owner.id},
          {"round", result.rounds},
          {"error_status", status_of(result.evaluation)},
          {"accepted", violation.empty()},
          {"violation", violation}});
    if (!violation.empty()) continue;
    ProgramState next{fixed->structure, result.state.impls};
    for (auto& [id, impl] : fixed->impls) {
      if (std::find(frozen.begin(), frozen.end(), id) == frozen.end()) next.impls[id] = impl;
    }
    result.state = std::move(next);
    result.evaluation = evaluate_state(result.state, Split::kValidation);
  }
  return result;
}

std::optional<FixResult> Educator::evaluate_with_fixing(ProgramState state, const std::vector<int>& frozen,
                                                        core::HeuristicIndividual& owner, CandidateRecord& record) {
  auto ev = evaluate_state(state, Split::kValidation);
  if (ev.ok()) {
    record.status = "ok";
    record.quality = ev.quality;
    return FixResult{std::move(state), std::move(ev), 0};
  }
  record.status = status_of(ev);
  try {
    auto fr = fix(std::move(state), std::move(ev), frozen, owner);
    record.status = "ok";
    record.quality = fr.evaluation.quality;
    record.fix_rounds = fr.rounds;
    return fr;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kFixBudgetExhausted) throw;
    record.fix_rounds = cfg_.max_fix_try;
    return std::nullopt;
  }
}

EducationResult Educator::educate(core::HeuristicIndividual individual) {
  EducationResult result;
  if (individual.evaluated() && individual.fully_realized()) {
    result.individual = std::move(individual);
    result.skipped = true;
    return result;
  }
  const auto id = individual.id;
  std::optional<FixResult> best_complete;
  auto note_complete = [&](const FixResult& fr) {
    if (!result.first_success_quality) result.first_success_quality = fr.evaluation.quality;
    if (!best_complete || *fr.evaluation.quality > *best_complete->evaluation.quality) best_complete = fr;
  };
  auto finish = [&](const FixResult& fr) {
    result.individual = individual;
    result.individual.structure = fr.state.structure;
    result.individual.impls = fr.state.impls;
    result.individual.quality = fr.evaluation.quality;
  };

  try {
    ProgramState state{individual.structure, {}};
    if (cfg_.one_shot) {
      auto ctx = deps_.context();
      SlotSearchRecord rec{id, 0, {}, -1};
      CandidateRecord cr;
      std::optional<FixResult> outcome;
      auto reply = ask(prompts::fill_all_prompt(*deps_.kit, ctx, core::realize(state.structure, state.impls)),
                       llm::Tag::kGeneration, individual);
      try {
        auto code = llm::extract_code_block(reply.text).code;
        ProgramState cand = state;
        for (const auto& slot : state.structure.slots) {
          if (auto impl = implemented_slot(code, slot.id))
            cand.impls[slot.id] = {slot.id, *impl, core::ImplOrigin::kLlmGenerated};
        }
        outcome = evaluate_with_fixing(std::move(cand), {}, individual, cr);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kBudgetExhausted) throw;
        cr.status = "unparseable";
      }
      rec.candidates.push_back(cr);
      emit({{"event", "slot_candidate"}, {"individual_id", id}, {"slot_id", 0}, {"candidate_idx", 0},
            {"status", cr.status}, {"quality", quality_json(cr.quality)}, {"fix_rounds", cr.fix_rounds}});
      if (!outcome) {
        result.records.push_back(rec);
        throw Error(ErrorCode::kAllCandidatesFailed, fmt::format("individual {}: one-shot completion failed", id));
      }
      rec.chosen_index = 0;
      result.records.push_back(rec);
      emit({{"event", "slot_commit"}, {"individual_id", id}, {"slot_id", 0}, {"chosen_index", 0},
            {"quality", quality_json(outcome->evaluation.quality)}});
      note_complete(*outcome);
      finish(*outcome);
    } else {
      std::vector<int> committed;
      std::optional<FixResult> last_choice;
      for (int t : slot_ids(state.structure)) {
        SlotSearchRecord rec{id, t, {}, -1};
        const std::string base = core::realize(state.structure, state.impls);
        std::vector<std::optional<std::string>> impls_t;
        std::vector<std::string> previous;
        for (int j = 0; j < cfg_.mc_func_pop; ++j) {
          auto ctx = deps_.context();
          auto reply = ask(prompts::fill_one_prompt(*deps_.kit, ctx, t, base, previous), llm::Tag::kGeneration,
                           individual);
          std::optional<std::string> impl;
          try {
            impl = implemented_slot(llm::extract_code_block(reply.text).code, t);
          } catch (const Error& e) {
            if (e.code() == ErrorCode::kBudgetExhausted) throw;
          }
          if (impl) previous.push_back(*impl);
          impls_t.push_back(impl);
        }
        std::vector<std::optional<FixResult>> outcomes;
        for (int j = 0; j < cfg_.mc_func_pop; ++j) {
          CandidateRecord cr;
          cr.candidate_idx = j;
          std::optional<FixResult> outcome;
          if (!impls_t[static_cast<std::size_t>(j)]) {
            cr.status = "unparseable";
          } else {
            ProgramState cand = state;
            cand.impls[t] = {t, *impls_t[static_cast<std::size_t>(j)], core::ImplOrigin::kLlmGenerated};
            auto ctx = deps_.context();
            auto reply = ask(prompts::fill_all_prompt(*deps_.kit, ctx, core::realize(cand.structure, cand.impls)),
                             llm::Tag::kGeneration, individual);
            std::string completion;
            try {
              completion = llm::extract_code_block(reply.text).code;
            } catch (const Error& e) {
              if (e.code() == ErrorCode::kBudgetExhausted) throw;
            }
            for (const auto& slot : cand.structure.slots) {
              if (cand.impls.count(slot.id)) continue;
              if (auto impl = implemented_slot(completion, slot.id))
                cand.impls[slot.id] = {slot.id, *impl, core::ImplOrigin::kLlmGenerated};
            }
            outcome = evaluate_with_fixing(std::move(cand), committed, individual, cr);
            if (outcome) note_complete(*outcome);
          }
          rec.candidates.push_back(cr);
          emit({{"event", "slot_candidate"}, {"individual_id", id}, {"slot_id", t}, {"candidate_idx", j},
                {"status", cr.status}, {"quality", quality_json(cr.quality)}, {"fix_rounds", cr.fix_rounds}});
          outcomes.push_back(std::move(outcome));
        }
        for (int j = 0; j < cfg_.mc_func_pop; ++j) {
          const auto& o = outcomes[static_cast<std::size_t>(j)];
          if (!o) continue;
          if (rec.chosen_index < 0 ||
              *o->evaluation.quality > *outcomes[static_cast<std::size_t>(rec.chosen_index)]->evaluation.quality)
            rec.chosen_index = j;
        }
        result.records.push_back(rec);
        if (rec.chosen_index < 0) {
          throw Error(ErrorCode::kAllCandidatesFailed, fmt::format("individual {}: every candidate for func_{} failed", id, t));
        }
        const auto& chosen = *outcomes[static_cast<std::size_t>(rec.chosen_index)];
        emit({{"event", "slot_commit"}, {"individual_id", id}, {"slot_id", t}, {"chosen_index", rec.chosen_index},
              {"quality", quality_json(chosen.evaluation.quality)}});
        state.structure = chosen.state.structure;
        for (int c : committed) state.impls[c] = chosen.state.impls.at(c);
        state.impls[t] = chosen.state.impls.at(t);
        committed.push_back(t);
        last_choice = chosen;
      }
      finish(*last_choice);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBudgetExhausted || !best_complete) throw;
    finish(*best_complete);
    result.budget_exhausted = true;
  }

  if (!result.budget_exhausted && cfg_.calibration) {
    try {
      calibrate(result);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBudgetExhausted) throw;
      result.budget_exhausted = true;
    }
  }
  emit({{"event", "education"},
        {"individual_id", id},
        {"first_quality", quality_json(result.first_success_quality)},
        {"final_quality", quality_json(result.individual.quality)},
        {"token_cost", result.individual.token_cost},
        {"budget_exhausted", result.budget_exhausted}});
  return result;
}

void Educator::calibrate(EducationResult& result) {
  auto& ind = result.individual;
  const bool tunable = std::any_of(ind.structure.hyper_block.begin(), ind.structure.hyper_block.end(),
                                   [](const auto& h) { return h.name != core::kMaxTimeName; });
  if (!tunable || cfg_.calibration_evals == 0) return;
  const std::string shown = core::realize(ind.structure, ind.impls);
  auto reply = ask(prompts::ask_ranges_prompt(*deps_.kit, shown), llm::Tag::kCalibrationRanges, ind);
  calibration::ParsedRanges parsed;
  try {
    parsed = calibration::parse_ranges(reply.text, ind.structure);
  } catch (const Error& e) {
    emit({{"event", "calibration"}, {"individual_id", ind.id}, {"skipped", e.what()}});
    return;
  }
  auto quality_on = [&](Split split) {
    return [this, &ind, split](const core::StructureCode& s) -> std::optional<double> {
      if (deps_.budget->exhausted()) return std::nullopt;
      return evaluate_state({s, ind.impls}, split).quality;
    };
  };
  calibration::CalibrationOptions opts;
  opts.max_evals = cfg_.calibration_evals;
  opts.seed = cfg_.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(ind.id + 1));
  auto cal = calibration::calibrate(ind.structure, *ind.quality, parsed.ranges, quality_on(Split::kCalibration),
                                    quality_on(Split::kValidation), opts);
  json ev = calibration::to_json(cal);
  ev["event"] = "calibration";
  ev["individual_id"] = ind.id;
  ev["warnings"] = parsed.warnings;
  emit(ev);
  if (cal.improved) {
    ind.structure = cal.structure;
    ind.quality = cal.post_quality;
  }
  result.calibration = std::move(cal);
}

}  // namespace heurgen::education
