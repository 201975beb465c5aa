#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "heurgen/core/model.hpp"

namespace heurgen::prompts {

using Fields = std::map<std::string, std::string, std::less<>>;

/// Declared contract of one template file.
struct TemplateInfo {
  std::string name;
  std::vector<std::string> placeholders;
  std::vector<std::string> fragments;  // must survive every render verbatim
};

const std::vector<TemplateInfo>& catalog();
const TemplateInfo& template_info(std::string_view name);

/// Placeholders used by a body, in first-appearance order. `{{` and `}}` are
/// literal braces.
std::vector<std::string> placeholders_in(std::string_view body);
std::string substitute(std::string_view body, const Fields& fields);

struct LintIssue {
  std::string template_name;
  std::string message;
};

class PromptKit {
 public:
  /// Loads every catalog template from `dir` (<name>.txt).
  static PromptKit load(const std::filesystem::path& dir);
  static PromptKit from_bodies(std::map<std::string, std::string, std::less<>> bodies);

  const std::string& body(std::string_view name) const;
  std::string render(std::string_view name, const Fields& fields) const;
  std::vector<LintIssue> lint() const;

 private:
  std::map<std::string, std::string, std::less<>> bodies_;
};

/// A database listing block: signature and docstring only.
struct ListingEntry {
  std::string name;
  std::string signature;
  std::string docstring;
};

/// heubase_common header followed by one fenced block per entry; empty when
/// there are no entries.
std::string render_listing(const PromptKit& kit, const std::vector<ListingEntry>& entries);

struct ChatPrompt {
  std::string system;
  std::string user;
};

/// Problem-level context shared by every generation prompt.
struct PromptContext {
  std::string alg_type = "heuristic";
  std::string problem;
  std::string problem_description;
  std::string baseline;
  int max_func_num = 4;
  int timeout_s = 60;
  std::string prior_knowledge;  // raw KnoBase text, may be empty
  std::string database;         // rendered listing, may be empty
};

std::string render_exterior(const PromptKit& kit, const PromptContext& ctx);
std::string render_crossover(const PromptKit& kit, std::string_view base, std::string_view worse_source,
                             std::string_view better_source);
std::string render_mutation(const PromptKit& kit, std::string_view base, std::string_view current_source,
                            std::string_view elite_source);

ChatPrompt init_prompt(const PromptKit& kit, const PromptContext& ctx);
/// Orders the parents by compare_quality; throws unevaluated_parent.
ChatPrompt crossover_prompt(const PromptKit& kit, const PromptContext& ctx, const core::HeuristicIndividual& a,
                            const core::HeuristicIndividual& b);
/// The elite is the compare_quality maximum of `population`.
ChatPrompt mutation_prompt(const PromptKit& kit, const PromptContext& ctx, const core::HeuristicIndividual& current,
                           const std::vector<core::HeuristicIndividual>& population);
ChatPrompt fill_one_prompt(const PromptKit& kit, const PromptContext& ctx, int slot_id, std::string_view program,
                           const std::vector<std::string>& previous_candidates);
ChatPrompt fill_all_prompt(const PromptKit& kit, const PromptContext& ctx, std::string_view program);
ChatPrompt fix_prompt(const PromptKit& kit, const PromptContext& ctx, std::string_view error_msg,
                      std::string_view program);
ChatPrompt ask_ranges_prompt(const PromptKit& kit, std::string_view program);
ChatPrompt naming_prompt(const PromptKit& kit, std::string_view function_code);

std::string fence(std::string_view code);

}  // namespace heurgen::prompts
