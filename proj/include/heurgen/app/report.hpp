#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "heurgen/problems/instance.hpp"

namespace heurgen::app {

struct CurvePoint {
  std::int64_t tokens_cum = 0;
  std::int64_t individual_id = 0;
  double best_gap_so_far = 0.0;
};

struct TestRow {
  std::string instance_id;
  std::string status;
  std::optional<double> objective;
  double reference = 0.0;
  std::optional<double> gap_pct;
};

struct RunReport {
  std::string run_id;
  std::string dir;
  problems::ProblemKind kind = problems::ProblemKind::kTsp;
  std::vector<CurvePoint> curve;
  std::optional<std::int64_t> best_id;
  std::vector<TestRow> test;  // rows of the best individual
  nlohmann::json summary;     // the run_end summary, null when absent

  std::optional<double> test_mean_gap() const;
  /// Test mean gap when available, else the final best validation gap.
  std::optional<double> headline_gap() const;
};

/// Reads `<dir>/log.jsonl`. Throws missing_log when the file is absent,
/// empty, or holds no evaluated individual.
RunReport load_run_report(const std::filesystem::path& dir);

std::string curve_csv(const RunReport& report);
std::string test_csv(const RunReport& report);
std::string test_table(const RunReport& report);
nlohmann::json best_summary(const RunReport& report);

struct AggregateRow {
  std::string label;  // run directory
  std::optional<double> gap_pct;
};

struct Aggregate {
  std::vector<AggregateRow> rows;
  std::optional<double> min_gap;
  std::optional<double> avg_gap;
};

Aggregate aggregate(const std::vector<RunReport>& reports);
std::string aggregate_table(const Aggregate& agg);

/// Writes curve.csv, test_gaps.csv and best_summary.json into `out_dir`.
void write_report(const RunReport& report, const std::filesystem::path& out_dir);

}  // namespace heurgen::app
