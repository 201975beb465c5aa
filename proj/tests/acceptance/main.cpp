#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "checks.hpp"

namespace heurgen::acceptance {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("heurgen_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<nlohmann::json> read_log(const fs::path& run_dir) {
  std::ifstream in(run_dir / "log.jsonl");
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

fs::path data_dir() { return HEURGEN_TEST_DATA; }
fs::path prompts_dir() { return HEURGEN_PROMPTS_DIR; }

}  // namespace heurgen::acceptance

int main() {
  using namespace heurgen::acceptance;
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"golden replay", golden_replay},
      {"generation schedule", ga_schedule},
      {"slot argmax", education_argmax},
      {"memory oracle", memory_oracle},
      {"evaluator oracles", evaluator_oracles},
      {"known values", spot_checks},
      {"cma-es convergence", cmaes_convergence},
      {"calibration safety", calibration_safety},
      {"sandbox limits", sandbox_limits},
      {"budget enforcement", budget_enforcement},
      {"prompt fidelity", prompt_fidelity},
      {"metric channel", metric_channel},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    fmt::print("[{}] {} {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail, secs);
    std::fflush(stdout);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
