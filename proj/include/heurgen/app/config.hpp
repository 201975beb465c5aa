#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heurgen/education/educate.hpp"
#include "heurgen/ga/evolution.hpp"
#include "heurgen/llm/gateway.hpp"
#include "heurgen/memory/adaptive_memory.hpp"
#include "heurgen/problems/instance.hpp"
#include "heurgen/sandbox/runner.hpp"

namespace heurgen::app {

enum class ReferenceMode { kAuto, kOracle, kFile, kConstructive };

struct ProblemConfig {
  problems::ProblemKind kind = problems::ProblemKind::kTsp;
  int size = 20;
  std::vector<std::uint64_t> validation_seeds{1, 2};
  std::vector<std::uint64_t> test_seeds{101, 102};
  ReferenceMode reference = ReferenceMode::kAuto;
  std::optional<std::filesystem::path> reference_file;
  std::vector<std::string> tags;
  std::string alg_type = "heuristic";
  int timeout_s = 10;
};

struct LlmConfig {
  std::string provider = "mock";  // mock | http
  std::filesystem::path transcript;
  llm::HttpConfig http;
  llm::GatewayConfig temperatures;
};

struct KnowledgeConfig {
  std::optional<std::filesystem::path> heubase_manifest;
  std::optional<std::filesystem::path> knobase_dir;
};

struct RunConfig {
  std::string run_id;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs";
  std::filesystem::path prompts_dir;
  int max_func_num = 4;
  ProblemConfig problem;
  llm::BudgetMode budget_mode = llm::BudgetMode::kTokens;
  std::int64_t budget_limit = 1'000'000;
  ga::GAConfig ga;
  education::EducationConfig education;
  double calibration_fraction = 0.5;
  memory::AMConfig am;
  LlmConfig llm;
  KnowledgeConfig knowledge;
  sandbox::SandboxConfig sandbox;
  nlohmann::json raw;  // the file as loaded, echoed into the run log

  void validate() const;
  std::filesystem::path run_dir() const { return output_dir / run_id; }
};

/// Parses a JSON config (comments allowed). Relative paths resolve against
/// the config file's directory.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Re-derives the seeds of the GA and education from `seed`.
void apply_seed(RunConfig& cfg, std::uint64_t seed);

}  // namespace heurgen::app
