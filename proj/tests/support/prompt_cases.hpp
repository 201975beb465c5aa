#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "heurgen/prompts/kit.hpp"

namespace heurgen::testing {

/// A fixed prompt render used for fragment and snapshot checks.
struct PromptCase {
  std::string name;
  std::vector<std::string> templates;  // catalog entries whose fragments must appear
  prompts::ChatPrompt prompt;
};

std::vector<PromptCase> prompt_cases(const prompts::PromptKit& kit);

std::string snapshot_text(const PromptCase& c);

/// Fragment misses and snapshot diffs, one line each; empty when all hold.
std::vector<std::string> check_prompt_cases(const prompts::PromptKit& kit, const std::filesystem::path& snapshot_dir);

}  // namespace heurgen::testing
