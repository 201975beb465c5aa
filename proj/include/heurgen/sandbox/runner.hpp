#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heurgen/problems/instance.hpp"

namespace heurgen::sandbox {

enum class Status { kOk, kCompileError, kRuntimeError, kConstraintViolation, kTimeout, kProtocolError };

std::string_view to_string(Status status);

/// Outcome of running one candidate program on one instance. The objective
/// is always recomputed by the problem validator from `solution`.
struct EvaluationReport {
  Status status = Status::kProtocolError;
  std::optional<nlohmann::json> solution;
  std::optional<double> objective;
  std::int64_t wall_ms = 0;
  int exit_code = 0;
  std::string details;  // classification or validator message
  std::string stderr_tail;
  std::string stdout_tail;

  bool ok() const { return status == Status::kOk; }
  /// Human-readable failure description used by the fix prompt.
  std::string error_message() const;
};

nlohmann::json to_json(const EvaluationReport& report);

/// How candidates are launched. The instance goes to stdin as JSON; the last
/// stdout line holding `{"solution": ...}` is the answer; everything else is
/// treated as progress output.
struct SandboxConfig {
  std::vector<std::string> interpreter_command{"python3", "{program_path}"};
  std::vector<std::string> wrapper;  // prepended to the interpreter argv, e.g. {"unshare", "-n"}
  double grace_s = 5.0;
  std::size_t memory_limit_mb = 0;  // 0 = unlimited
  std::vector<std::string> env_allowlist{"PATH", "HOME", "LANG", "LC_ALL", "PYTHONPATH", "VIRTUAL_ENV",
                                         "OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"};
  std::map<std::string, std::string> extra_env{{"PYTHONHASHSEED", "0"}, {"PYTHONDONTWRITEBYTECODE", "1"}};
  std::vector<std::string> compile_diagnostics{"SyntaxError", "IndentationError", "TabError"};
  std::filesystem::path workspace_root = std::filesystem::temp_directory_path();
  std::size_t tail_bytes = 4096;
  std::size_t max_capture_bytes = std::size_t{32} << 20;
  int workers = 1;
};

/// Runs `program` once against `instance` with a hard kill at
/// max_time_s + grace_s. Throws sandbox_setup_failure on host errors only.
EvaluationReport run(const std::string& program, const problems::ProblemInstance& instance, double max_time_s,
                     const SandboxConfig& config);

/// Independent runs in instance order; with `short_circuit` the result ends
/// at the first non-ok report.
std::vector<EvaluationReport> run_batch(const std::string& program,
                                        const std::vector<problems::ProblemInstance>& instances,
                                        double max_time_s, const SandboxConfig& config, bool short_circuit = false);

}  // namespace heurgen::sandbox
