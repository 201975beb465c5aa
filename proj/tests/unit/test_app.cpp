#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "heurgen/app/config.hpp"
#include "heurgen/app/report.hpp"
#include "heurgen/app/run.hpp"
#include "heurgen/common/error.hpp"
#include "heurgen/problems/suite.hpp"
#include "responder.hpp"

using namespace heurgen;
using namespace heurgen::app;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kData = HEURGEN_TEST_DATA;

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("heurgen_app_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig golden(const std::string& name) {
  auto cfg = load_config(kData + "/golden/config.json");
  cfg.output_dir = scratch(name);
  return cfg;
}

RunHooks stub_hooks(testing::ResponderOptions o = {}) {
  RunHooks h;
  h.provider = [o] { return std::make_unique<testing::Responder>(o); };
  h.evaluator = [](const auto&, const auto&) { return std::make_unique<testing::StubEvaluator>(); };
  return h;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kIoError;
}

std::vector<json> read_log(const fs::path& dir) {
  std::ifstream in(dir / "log.jsonl");
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  auto dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "c.json");
    out << R"({
      // comments are allowed
      "run_id": "x",
      "problem": {"kind": "mis", "size": 12, "validation_seeds": [1, 2], "test_seeds": [2, 3]},
      "llm": {"provider": "mock", "transcript": "t.jsonl"}
    })";
  }
  CHECK(code_of([&] { load_config(dir / "c.json"); }) == ErrorCode::kConfigInvalid);

  json doc = {{"run_id", "y"},
              {"seed", 4},
              {"problem", {{"kind", "bpp"}, {"size", 8}}},
              {"budget", {{"mode", "time_seconds"}, {"limit", 60}}},
              {"llm", {{"provider", "mock"}, {"transcript", "t.jsonl"}}},
              {"am", {{"c_max", 3}}}};
  auto cfg = config_from_json(doc, dir);
  CHECK(cfg.problem.kind == problems::ProblemKind::kBpp);
  CHECK(cfg.budget_mode == llm::BudgetMode::kTimeSeconds);
  CHECK(cfg.llm.transcript == dir / "t.jsonl");
  CHECK(cfg.am.c_max == 3);
  CHECK(cfg.ga.rng_seed == 4);
  CHECK(cfg.run_dir() == cfg.output_dir / "y");

  doc["llm"]["provider"] = "carrier-pigeon";
  CHECK(code_of([&] { config_from_json(doc, dir); }) == ErrorCode::kConfigInvalid);
}

TEST_CASE("instances use oracle or constructive references") {
  ProblemConfig p;
  p.kind = problems::ProblemKind::kTsp;
  p.size = 6;
  auto small = build_instances(p, {1, 2});
  REQUIRE(small.size() == 2);
  CHECK(small[0].id == "tsp-6-1");
  CHECK(small[0].reference == problems::brute_force_reference(small[0].instance).value);
  p.size = 30;
  auto big = build_instances(p, {1});
  CHECK(big[0].reference == problems::constructive_reference(big[0].instance).value);
  p.reference = ReferenceMode::kOracle;
  CHECK(code_of([&] { build_instances(p, {1}); }) == ErrorCode::kSizeExceedsOracle);
}

TEST_CASE("a zero budget ends cleanly") {
  auto cfg = golden("zero");
  cfg.budget_limit = 0;
  auto r = run(cfg, {}, stub_hooks());
  CHECK(r.completed);
  CHECK(r.summary["termination"] == "budget_exhausted");
  CHECK(r.summary["best_individual_id"].is_null());
  CHECK(r.summary["tokens_used"] == 0);
  CHECK(fs::exists(r.dir / "summary.json"));
}

TEST_CASE("a full stubbed run writes every artifact") {
  auto cfg = golden("full");
  auto r = run(cfg, {}, stub_hooks());
  REQUIRE(r.completed);
  for (auto f : {"log.jsonl", "best.json", "best_program.txt", "summary.json", "am.json", "timing.json",
                 "transcript.jsonl", "heubase_stats.json"})
    CHECK(fs::exists(r.dir / f));
  CHECK(r.summary["generations_completed"] == 2);
  auto log = read_log(r.dir);
  CHECK(log.front()["event"] == "run_start");
  CHECK(log.back()["event"] == "run_end");
  int gens = 0;
  for (const auto& e : log) gens += e["event"] == "generation";
  CHECK(gens == 3);
}

TEST_CASE("token budget stops the run") {
  auto cfg = golden("tokens");
  cfg.budget_limit = 3000;
  testing::ResponderOptions o;
  o.max_usage = 800;
  auto r = run(cfg, {}, stub_hooks(o));
  REQUIRE(r.completed);
  CHECK(r.summary["budget_exhausted"] == true);
  CHECK(r.summary["budget_consumed"].get<std::int64_t>() < 3000 + 800);
}

TEST_CASE("reports") {
  CHECK(code_of([] { load_run_report(scratch("nothing")); }) == ErrorCode::kMissingLog);
  auto empty = scratch("empty");
  fs::create_directories(empty);
  std::ofstream(empty / "log.jsonl").close();
  CHECK(code_of([&] { load_run_report(empty); }) == ErrorCode::kMissingLog);

  auto cfg = golden("report");
  auto r = run(cfg, {}, stub_hooks());
  auto rep = load_run_report(r.dir);
  REQUIRE_FALSE(rep.curve.empty());
  for (std::size_t i = 1; i < rep.curve.size(); ++i) {
    CHECK(rep.curve[i].best_gap_so_far <= rep.curve[i - 1].best_gap_so_far);
    CHECK(rep.curve[i].tokens_cum >= rep.curve[i - 1].tokens_cum);
  }
  CHECK_FALSE(rep.test.empty());
  CHECK(rep.best_id == r.summary["best_individual_id"].get<std::int64_t>());
  CHECK(curve_csv(rep).rfind("tokens_cum,", 0) == 0);
  auto out = scratch("report_out");
  write_report(rep, out);
  CHECK(fs::exists(out / "curve.csv"));
  CHECK(fs::exists(out / "best_summary.json"));
}

TEST_CASE("aggregation over runs") {
  RunReport a, b, c;
  a.dir = "a";
  b.dir = "b";
  c.dir = "c";
  a.curve = {{10, 1, 4.0}};
  b.curve = {{10, 1, 2.0}};
  c.curve = {};
  auto agg = aggregate({a, b, c});
  REQUIRE(agg.min_gap.has_value());
  CHECK(*agg.min_gap == 2.0);
  CHECK(*agg.avg_gap == 3.0);
  CHECK(*agg.min_gap <= *agg.avg_gap);
  auto table = aggregate_table(agg);
  CHECK(table.find("MIN") != std::string::npos);
  CHECK(table.find("AVG") != std::string::npos);
}

TEST_CASE("bench records failed attempts") {
  auto cfg = golden("bench");
  cfg.ga.generations = 0;
  int attempt = 0;
  RunHooks hooks = stub_hooks();
  hooks.provider = [&attempt] {
    testing::ResponderOptions o;
    o.garbage_rate = attempt++ == 1 ? 1.0 : 0.0;
    return std::make_unique<testing::Responder>(o);
  };
  auto agg = bench(cfg, 3, hooks);
  REQUIRE(agg["attempts"].size() == 3);
  CHECK(agg["attempts"][0]["status"] == "ok");
  CHECK(agg["attempts"][1]["status"] == "failed");
  CHECK(agg["attempts"][2]["seed"] == cfg.seed + 2);
  CHECK(agg["succeeded"] == 2);
  CHECK(agg["min_gap_pct"].get<double>() <= agg["avg_gap_pct"].get<double>());
  CHECK(fs::exists(cfg.run_dir() / "aggregate.json"));
}
