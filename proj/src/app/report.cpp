#include "heurgen/app/report.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/education/evaluator.hpp"

namespace heurgen::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_opt(const std::optional<double>& v, int precision = 4) {
  return v ? fmt::format("{:.{}f}", *v, precision) : std::string("NA");
}

std::optional<double> opt_of(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

std::optional<double> RunReport::test_mean_gap() const {
  if (test.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& r : test) {
    if (!r.gap_pct) return std::nullopt;
    sum += *r.gap_pct;
  }
  return sum / static_cast<double>(test.size());
}

std::optional<double> RunReport::headline_gap() const {
  if (auto g = test_mean_gap()) return g;
  if (curve.empty()) return std::nullopt;
  return curve.back().best_gap_so_far;
}

RunReport load_run_report(const fs::path& dir) {
  const auto path = dir / "log.jsonl";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingLog, fmt::format("{} does not exist", path.string()));

  RunReport report;
  report.run_id = dir.filename().string();
  report.dir = dir.lexically_normal().string();
  bool saw_start = false;
  std::optional<double> best_quality;
  std::vector<TestRow> all_tests;
  std::vector<std::int64_t> test_owner;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto ev = json::parse(line, nullptr, false);
    if (ev.is_discarded() || !ev.is_object()) {
      throw Error(ErrorCode::kMissingLog, fmt::format("{}:{} is not a JSON object", path.string(), lineno));
    }
    const auto kind = ev.value("event", std::string());
    if (kind == "run_start") {
      saw_start = true;
      report.run_id = ev.value("run_id", report.run_id);
      report.kind = problems::problem_kind_from_string(ev.at("problem").at("kind").get<std::string>());
    } else if (kind == "individual") {
      const double q = ev.at("quality").get<double>();
      if (!best_quality || q > *best_quality) best_quality = q;
      CurvePoint p;
      p.tokens_cum = ev.at("tokens_cum").get<std::int64_t>();
      p.individual_id = ev.at("id").get<std::int64_t>();
      p.best_gap_so_far = education::gap_from_quality(*best_quality, problems::sense_of(report.kind));
      report.curve.push_back(p);
    } else if (kind == "test_result") {
      TestRow r;
      r.instance_id = ev.at("instance_id").get<std::string>();
      r.status = ev.at("status").get<std::string>();
      r.objective = opt_of(ev.at("objective"));
      r.reference = ev.at("reference").get<double>();
      r.gap_pct = opt_of(ev.at("gap_pct"));
      all_tests.push_back(std::move(r));
      test_owner.push_back(ev.at("individual_id").get<std::int64_t>());
    } else if (kind == "run_end") {
      report.summary = ev.at("summary");
      if (!report.summary.at("best_individual_id").is_null())
        report.best_id = report.summary.at("best_individual_id").get<std::int64_t>();
    }
  }
  if (lineno == 0) throw Error(ErrorCode::kMissingLog, fmt::format("{} is empty", path.string()));
  if (!saw_start) throw Error(ErrorCode::kMissingLog, fmt::format("{} has no run_start record", path.string()));
  if (report.curve.empty()) {
    throw Error(ErrorCode::kMissingLog, fmt::format("{} holds no evaluated individual", path.string()));
  }
  for (std::size_t i = 0; i < all_tests.size(); ++i) {
    if (report.best_id && test_owner[i] == *report.best_id) report.test.push_back(all_tests[i]);
  }
  return report;
}

std::string curve_csv(const RunReport& report) {
  std::string out = "tokens_cum,individual_id,best_gap_so_far\n";
  for (const auto& p : report.curve) out += fmt::format("{},{},{:.6f}\n", p.tokens_cum, p.individual_id, p.best_gap_so_far);
  return out;
}

std::string test_csv(const RunReport& report) {
  std::string out = "instance_id,status,objective,reference,gap_pct\n";
  for (const auto& r : report.test) {
    out += fmt::format("{},{},{},{:.6f},{}\n", r.instance_id, r.status, fmt_opt(r.objective, 6), r.reference,
                       fmt_opt(r.gap_pct, 6));
  }
  return out;
}

std::string test_table(const RunReport& report) {
  std::size_t w = 11;
  for (const auto& r : report.test) w = std::max(w, r.instance_id.size());
  std::string out = fmt::format("{:<{}}  {:<20}  {:>12}  {:>12}  {:>9}\n", "instance", w, "status", "objective",
                                "reference", "gap%");
  for (const auto& r : report.test) {
    out += fmt::format("{:<{}}  {:<20}  {:>12}  {:>12.4f}  {:>9}\n", r.instance_id, w, r.status, fmt_opt(r.objective),
                       r.reference, fmt_opt(r.gap_pct, 2));
  }
  out += fmt::format("{:<{}}  {:<20}  {:>12}  {:>12}  {:>9}\n", "mean", w, "", "", "", fmt_opt(report.test_mean_gap(), 2));
  return out;
}

json best_summary(const RunReport& report) {
  json doc = {{"run_id", report.run_id},
              {"problem", problems::to_string(report.kind)},
              {"best_individual_id", report.best_id ? json(*report.best_id) : json(nullptr)},
              {"final_best_gap_pct", report.curve.back().best_gap_so_far},
              {"tokens_cum", report.curve.back().tokens_cum}};
  auto mean = report.test_mean_gap();
  doc["test_mean_gap_pct"] = mean ? json(*mean) : json(nullptr);
  if (!report.summary.is_null()) doc["summary"] = report.summary;
  return doc;
}

Aggregate aggregate(const std::vector<RunReport>& reports) {
  Aggregate agg;
  double sum = 0.0;
  int n = 0;
  for (const auto& r : reports) {
    AggregateRow row{r.dir, r.headline_gap()};
    if (row.gap_pct) {
      sum += *row.gap_pct;
      ++n;
      agg.min_gap = agg.min_gap ? std::min(*agg.min_gap, *row.gap_pct) : *row.gap_pct;
    }
    agg.rows.push_back(std::move(row));
  }
  if (n > 0) agg.avg_gap = sum / n;
  return agg;
}

std::string aggregate_table(const Aggregate& agg) {
  std::size_t w = 7;
  for (const auto& r : agg.rows) w = std::max(w, r.label.size());
  std::string out = fmt::format("{:<{}}  {:>9}\n", "run", w, "gap%");
  for (const auto& r : agg.rows) out += fmt::format("{:<{}}  {:>9}\n", r.label, w, fmt_opt(r.gap_pct, 2));
  out += fmt::format("{:<{}}  {:>9}\n", "MIN", w, fmt_opt(agg.min_gap, 2));
  out += fmt::format("{:<{}}  {:>9}\n", "AVG", w, fmt_opt(agg.avg_gap, 2));
  return out;
}

void write_report(const RunReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", (out_dir / name).string()));
    out << text;
  };
  put("curve.csv", curve_csv(report));
  put("test_gaps.csv", test_csv(report));
  put("best_summary.json", best_summary(report).dump(2) + "\n");
}

}  // namespace heurgen::app
