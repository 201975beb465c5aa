#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "heurgen/core/model.hpp"

namespace heurgen::calibration {

struct RangeSpec {
  std::string name;
  double low = 0.0;
  double high = 1.0;
  bool is_integer = false;
};

struct ParsedRanges {
  std::vector<RangeSpec> ranges;
  std::vector<std::string> warnings;
};

/// Reads `pms_dict = {"NAME": (lo, hi), ...}` from a completion. MAX_TIME and
/// names outside the hyper block are dropped.
ParsedRanges parse_ranges(std::string_view completion, const core::StructureCode& structure);

struct CmaOptions {
  double sigma0 = 0.3;
  std::int64_t max_evals = 1000;
  std::uint64_t seed = 0;
  int lambda = 0;  // 0: 4 + floor(3 ln d)
  Eigen::VectorXd lower;  // empty: unbounded
  Eigen::VectorXd upper;
};

struct CmaResult {
  Eigen::VectorXd best_x;
  double best_f = 0.0;
  std::int64_t evals = 0;
  int generations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

int default_lambda(int dimension);

/// Minimizes `f` from `x0`; candidates are clamped into the box before
/// evaluation. Non-finite values rank last and still count as evaluations.
CmaResult cmaes_minimize(const Objective& f, const Eigen::VectorXd& x0, const CmaOptions& options);

struct CalibrationOptions {
  std::int64_t max_evals = 50;
  double sigma0 = 0.3;  // in the unit-normalized box
  std::uint64_t seed = 0;
};

/// Quality of a structure variant (higher is better); nullopt when the
/// variant could not be evaluated.
using QualityFn = std::function<std::optional<double>(const core::StructureCode&)>;

struct CalibrationResult {
  core::StructureCode structure;
  bool improved = false;
  double pre_quality = 0.0;
  double post_quality = 0.0;
  std::int64_t evals_used = 0;
  std::vector<core::HyperParam> best_params;
};

nlohmann::json to_json(const CalibrationResult& result);

/// Hyper values decoded from a unit-box point: integers round-then-clamp.
std::vector<core::HyperParam> decode(const Eigen::VectorXd& unit, const std::vector<RangeSpec>& ranges);

/// CMA-ES over `ranges` using `search_quality`; the best variant is accepted
/// only when `confirm_quality` strictly beats `incumbent_quality`.
CalibrationResult calibrate(const core::StructureCode& structure, double incumbent_quality,
                            const std::vector<RangeSpec>& ranges, const QualityFn& search_quality,
                            const QualityFn& confirm_quality, const CalibrationOptions& options);

}  // namespace heurgen::calibration
