#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "heurgen/app/config.hpp"
#include "heurgen/education/evaluator.hpp"
#include "heurgen/llm/gateway.hpp"

namespace heurgen::app {

struct RunOptions {
  bool resume = false;
  std::optional<int> stop_after;  // stop once this generation is checkpointed
};

/// Test seams; unset members fall back to the configured behaviour.
struct RunHooks {
  std::function<std::unique_ptr<llm::Provider>()> provider;
  std::function<std::unique_ptr<education::Evaluator>(const std::vector<education::EvalInstance>& validation,
                                                      const std::vector<education::EvalInstance>& test)>
      evaluator;
  llm::RunBudget::Clock clock;
};

struct RunResult {
  std::filesystem::path dir;
  nlohmann::json summary;  // null when the run stopped early
  bool completed = false;
};

/// Validation and test instances with their references.
std::vector<education::EvalInstance> build_instances(const ProblemConfig& problem,
                                                     const std::vector<std::uint64_t>& seeds);

RunResult run(const RunConfig& cfg, const RunOptions& options = {}, const RunHooks& hooks = {});

/// Attempts with seeds seed, seed+1, ... in `<run_dir>/attempt_<k>`, plus
/// aggregate.json. Failed attempts are recorded and skipped.
nlohmann::json bench(const RunConfig& cfg, int attempts, const RunHooks& hooks = {});

}  // namespace heurgen::app
