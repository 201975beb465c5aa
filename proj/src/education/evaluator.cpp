#include "heurgen/education/evaluator.hpp"

#include <cmath>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/problems/suite.hpp"

namespace heurgen::education {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kValidation: return "validation";
    case Split::kCalibration: return "calibration";
    case Split::kTest: return "test";
  }
  return "validation";
}

nlohmann::json to_json(const InstanceResult& r) {
  return {{"instance_id", r.instance_id},
          {"status", sandbox::to_string(r.status)},
          {"objective", r.objective ? nlohmann::json(*r.objective) : nlohmann::json(nullptr)},
          {"reference", r.reference},
          {"gap_pct", r.gap_pct ? nlohmann::json(*r.gap_pct) : nlohmann::json(nullptr)},
          {"wall_ms", r.wall_ms}};
}

double quality_of(const std::vector<double>& objectives, const std::vector<double>& references, problems::Sense sense) {
  if (objectives.empty() || objectives.size() != references.size())
    throw Error(ErrorCode::kInvalidArgument, "quality needs matching, non-empty objective and reference lists");
  double sum = 0.0;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    if (references[i] == 0.0) throw Error(ErrorCode::kZeroReference, "reference value is zero");
    sum += sense == problems::Sense::kMinimize ? (objectives[i] - references[i]) / references[i]
                                               : objectives[i] / references[i];
  }
  const double mean = sum / static_cast<double>(objectives.size());
  return sense == problems::Sense::kMinimize ? -mean : mean;
}

double gap_from_quality(double quality, problems::Sense sense) {
  return sense == problems::Sense::kMinimize ? -quality * 100.0 : (1.0 - quality) * 100.0;
}

SandboxEvaluator::SandboxEvaluator(problems::ProblemKind kind, std::vector<EvalInstance> validation,
                                   std::vector<EvalInstance> test, double calibration_fraction, double max_time_s,
                                   sandbox::SandboxConfig config)
    : kind_(kind),
      validation_(std::move(validation)),
      test_(std::move(test)),
      max_time_s_(max_time_s),
      config_(std::move(config)) {
  if (validation_.empty()) throw Error(ErrorCode::kConfigInvalid, "at least one validation instance is required");
  const auto k = static_cast<std::size_t>(
      std::clamp<double>(std::ceil(calibration_fraction * static_cast<double>(validation_.size())), 1.0,
                         static_cast<double>(validation_.size())));
  calibration_.assign(validation_.begin(), validation_.begin() + static_cast<std::ptrdiff_t>(k));
}

const std::vector<EvalInstance>& SandboxEvaluator::instances(Split split) const {
  switch (split) {
    case Split::kValidation: return validation_;
    case Split::kCalibration: return calibration_;
    case Split::kTest: return test_;
  }
  return validation_;
}

Evaluation SandboxEvaluator::evaluate(const std::string& program, Split split) {
  const auto& set = instances(split);
  if (set.empty()) throw Error(ErrorCode::kConfigInvalid, fmt::format("no {} instances configured", to_string(split)));
  std::vector<problems::ProblemInstance> batch;
  for (const auto& e : set) batch.push_back(e.instance);
  const bool short_circuit = split != Split::kTest;
  auto reports = sandbox::run_batch(program, batch, max_time_s_, config_, short_circuit);

  Evaluation ev;
  std::vector<double> objs;
  std::vector<double> refs;
  const auto sense = problems::sense_of(kind_);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    InstanceResult ir;
    ir.instance_id = set[i].id;
    ir.status = r.status;
    ir.reference = set[i].reference;
    ir.wall_ms = r.wall_ms;
    if (r.ok()) {
      ir.objective = r.objective;
      ir.gap_pct = problems::gap(*r.objective, set[i].reference, sense);
      objs.push_back(*r.objective);
      refs.push_back(set[i].reference);
    } else if (!ev.failure) {
      ev.failure = r;
    }
    ev.instances.push_back(ir);
  }
  if (!ev.failure) ev.quality = quality_of(objs, refs, sense);
  return ev;
}

}  // namespace heurgen::education
