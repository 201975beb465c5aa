#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "heurgen/app/config.hpp"
#include "heurgen/app/report.hpp"
#include "heurgen/app/run.hpp"
#include "heurgen/common/error.hpp"
#include "heurgen/knowledge/store.hpp"
#include "heurgen/prompts/kit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

heurgen::app::RunConfig load(const std::string& path, std::optional<std::uint64_t> seed, const std::string& mock,
                          const std::string& output_dir) {
  auto cfg = heurgen::app::load_config(path);
  if (seed) heurgen::app::apply_seed(cfg, *seed);
  if (!mock.empty()) {
    cfg.llm.provider = "mock";
    cfg.llm.transcript = fs::absolute(mock);
  }
  if (!output_dir.empty()) cfg.output_dir = fs::absolute(output_dir);
  cfg.validate();
  return cfg;
}

int print_report(const std::vector<std::string>& dirs, const std::string& format, bool aggregate,
                 const std::string& out_dir) {
  std::vector<heurgen::app::RunReport> reports;
  for (const auto& d : dirs) reports.push_back(heurgen::app::load_run_report(d));
  if (aggregate) {
    const auto agg = heurgen::app::aggregate(reports);
    if (format == "csv") {
      std::cout << "run,gap_pct\n";
      auto cell = [](const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string("NA"); };
      for (const auto& r : agg.rows) std::cout << r.label << ',' << cell(r.gap_pct) << '\n';
      std::cout << "MIN," << cell(agg.min_gap) << "\nAVG," << cell(agg.avg_gap) << '\n';
    } else {
      std::cout << heurgen::app::aggregate_table(agg);
    }
    return 0;
  }
  for (const auto& r : reports) {
    const fs::path target = out_dir.empty() ? fs::path(dirs.front()) / "report" : fs::path(out_dir) / r.run_id;
    heurgen::app::write_report(r, target);
    if (format == "csv") {
      std::cout << heurgen::app::test_csv(r);
    } else {
      std::cout << fmt::format("run {}  best individual {}\n", r.run_id, r.best_id ? std::to_string(*r.best_id) : "none");
      std::cout << heurgen::app::test_table(r);
    }
    spdlog::info("report files written to {}", target.string());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolves heuristic programs with a language model in the loop"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::string config, mock, output_dir;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  std::optional<int> stop_after;
  auto* run_cmd = app.add_subcommand("run", "Run one evolution");
  run_cmd->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Override the run seed");
  run_cmd->add_option("--mock", mock, "Replay this transcript instead of calling an endpoint")->check(CLI::ExistingFile);
  run_cmd->add_option("--output-dir", output_dir, "Override the output directory");
  run_cmd->add_flag("--resume", resume, "Continue from the run directory's checkpoint");
  run_cmd->add_option("--stop-after", stop_after, "Stop once this generation is checkpointed");

  std::vector<std::string> run_dirs;
  std::string format = "table", report_out;
  bool aggregate = false;
  auto* report_cmd = app.add_subcommand("report", "Summarize finished runs");
  report_cmd->add_option("run_dirs", run_dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "table"}));
  report_cmd->add_flag("--aggregate", aggregate, "MIN/AVG over the given runs");
  report_cmd->add_option("--out", report_out, "Directory for report files");

  int attempts = 3;
  auto* bench_cmd = app.add_subcommand("bench", "Repeat a run with derived seeds");
  bench_cmd->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--attempts", attempts, "Number of attempts")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", seed, "Base seed");
  bench_cmd->add_option("--mock", mock, "Transcript; {attempt} expands to the attempt index");
  bench_cmd->add_option("--output-dir", output_dir, "Override the output directory");

  std::string prompts_dir = HEURGEN_PROMPTS_DIR;
  auto* prompts_cmd = app.add_subcommand("prompts", "Prompt template tools");
  prompts_cmd->require_subcommand(1);
  auto* lint_cmd = prompts_cmd->add_subcommand("lint", "Check placeholders and required fragments");
  lint_cmd->add_option("--dir", prompts_dir, "Template directory")->check(CLI::ExistingDirectory);

  std::string manifest, stats_run;
  auto* heubase_cmd = app.add_subcommand("heubase", "Heuristic database tools");
  heubase_cmd->require_subcommand(1);
  auto* hb_lint = heubase_cmd->add_subcommand("lint", "Validate a manifest");
  hb_lint->add_option("--manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  auto* hb_stats = heubase_cmd->add_subcommand("stats", "Selection frequencies");
  hb_stats->add_option("--manifest", manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  hb_stats->add_option("--run", stats_run, "Run directory holding heubase_stats.json")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*run_cmd) {
      auto cfg = load(config, seed, mock, output_dir);
      heurgen::app::RunOptions opts{resume, stop_after};
      auto result = heurgen::app::run(cfg, opts);
      if (result.completed) std::cout << result.summary.dump(2) << '\n';
      else std::cout << fmt::format("stopped; resume with --resume (dir {})\n", result.dir.string());
      return 0;
    }
    if (*report_cmd) return print_report(run_dirs, format, aggregate, report_out);
    if (*bench_cmd) {
      auto cfg = load(config, seed, "", output_dir);
      if (!mock.empty()) {
        cfg.llm.provider = "mock";
        cfg.llm.transcript = fs::absolute(mock);
      }
      std::cout << heurgen::app::bench(cfg, attempts).dump(2) << '\n';
      return 0;
    }
    if (*lint_cmd) {
      const auto issues = heurgen::prompts::PromptKit::load(prompts_dir).lint();
      for (const auto& i : issues) std::cout << i.template_name << ": " << i.message << '\n';
      std::cout << (issues.empty() ? "prompts ok\n" : fmt::format("{} issue(s)\n", issues.size()));
      return issues.empty() ? 0 : 2;
    }
    if (*hb_lint) {
      const auto base = heurgen::knowledge::HeuBase::load_manifest(manifest);
      const auto issues = base.lint();
      for (const auto& i : issues) std::cout << i << '\n';
      std::cout << fmt::format("{} entries, {} issue(s)\n", base.entries().size(), issues.size());
      return issues.empty() ? 0 : 2;
    }
    if (*hb_stats) {
      const auto base = heurgen::knowledge::HeuBase::load_manifest(manifest);
      heurgen::knowledge::SelectionStats stats(base);
      if (!stats_run.empty()) {
        std::ifstream in(fs::path(stats_run) / "heubase_stats.json");
        if (!in) throw heurgen::Error(heurgen::ErrorCode::kIoError, "run directory has no heubase_stats.json");
        stats.restore(json::parse(in));
      }
      std::cout << fmt::format("{:<32} {:>10} {:>10}\n", "entry", "selected", "frequency");
      for (const auto& e : base.entries()) {
        std::cout << fmt::format("{:<32} {:>10} {:>10.3f}\n", e.name, stats.count(e.name), stats.frequency(e.name));
      }
      std::cout << fmt::format("observed programs: {}\n", stats.observed());
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
