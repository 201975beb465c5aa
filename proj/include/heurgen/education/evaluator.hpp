#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heurgen/problems/instance.hpp"
#include "heurgen/sandbox/runner.hpp"

namespace heurgen::education {

enum class Split { kValidation, kCalibration, kTest };

std::string_view to_string(Split split);

struct InstanceResult {
  std::string instance_id;
  sandbox::Status status = sandbox::Status::kOk;
  std::optional<double> objective;
  double reference = 0.0;
  std::optional<double> gap_pct;
  std::int64_t wall_ms = 0;
};

nlohmann::json to_json(const InstanceResult& r);

struct Evaluation {
  std::optional<double> quality;
  std::vector<InstanceResult> instances;
  std::optional<sandbox::EvaluationReport> failure;  // first non-ok report

  bool ok() const { return quality.has_value(); }
};

/// Scores a complete, assembled program (driver included).
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Evaluation evaluate(const std::string& program, Split split) = 0;
};

/// Minimization: -mean((obj - ref) / ref). Maximization: mean(obj / ref).
double quality_of(const std::vector<double>& objectives, const std::vector<double>& references, problems::Sense sense);
/// Gap in percent implied by a quality value.
double gap_from_quality(double quality, problems::Sense sense);

struct EvalInstance {
  std::string id;
  problems::ProblemInstance instance;
  double reference = 0.0;
};

class SandboxEvaluator : public Evaluator {
 public:
  SandboxEvaluator(problems::ProblemKind kind, std::vector<EvalInstance> validation, std::vector<EvalInstance> test,
                   double calibration_fraction, double max_time_s, sandbox::SandboxConfig config);

  Evaluation evaluate(const std::string& program, Split split) override;

  const std::vector<EvalInstance>& instances(Split split) const;

 private:
  problems::ProblemKind kind_;
  std::vector<EvalInstance> validation_;
  std::vector<EvalInstance> calibration_;
  std::vector<EvalInstance> test_;
  double max_time_s_;
  sandbox::SandboxConfig config_;
};

}  // namespace heurgen::education
