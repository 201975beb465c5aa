#include "heurgen/app/run.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "heurgen/common/error.hpp"
#include "heurgen/core/structure.hpp"
#include "heurgen/education/educate.hpp"
#include "heurgen/ga/evolution.hpp"
#include "heurgen/knowledge/store.hpp"
#include "heurgen/memory/adaptive_memory.hpp"
#include "heurgen/problems/binding.hpp"
#include "heurgen/problems/suite.hpp"
#include "heurgen/prompts/kit.hpp"

namespace heurgen::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

/// Append-only JSONL writer that knows how many lines the file holds.
class JsonlLog {
 public:
  JsonlLog(const fs::path& path, std::size_t existing_lines) : lines_(existing_lines) {
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw Error(ErrorCode::kIoError, fmt::format("cannot open {}", path.string()));
  }

  void write(const json& event) {
    out_ << event.dump() << '\n';
    out_.flush();
    ++lines_;
  }

  std::size_t lines() const { return lines_; }

 private:
  std::ofstream out_;
  std::size_t lines_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", tmp.string()));
    out << text;
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

/// Keeps the first `n` lines of a file; a missing file counts as empty.
void truncate_lines(const fs::path& path, std::size_t n) {
  if (!fs::exists(path)) {
    if (n > 0) throw Error(ErrorCode::kIoError, fmt::format("{} is missing", path.string()));
    return;
  }
  const auto text = read_file(path);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      throw Error(ErrorCode::kIoError, fmt::format("{} holds fewer than {} lines", path.string(), n));
    }
    pos = nl + 1;
  }
  write_file(path, text.substr(0, pos));
}

json lineage_json(const core::Lineage& l) { return {{"kind", core::to_string(l.kind)}, {"parents", l.parents}}; }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::vector<education::EvalInstance> build_instances(const ProblemConfig& problem,
                                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<education::EvalInstance> out;
  for (auto seed : seeds) {
    education::EvalInstance ei;
    ei.id = problems::instance_id(problem.kind, problem.size, seed);
    ei.instance = problems::generate(problem.kind, problem.size, seed);
    switch (problem.reference) {
      case ReferenceMode::kOracle:
        ei.reference = problems::brute_force_reference(ei.instance).value;
        break;
      case ReferenceMode::kFile:
        ei.reference = problems::file_reference(*problem.reference_file, ei.id);
        break;
      case ReferenceMode::kConstructive:
        ei.reference = problems::constructive_reference(ei.instance).value;
        break;
      case ReferenceMode::kAuto:
        try {
          ei.reference = problems::brute_force_reference(ei.instance).value;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kSizeExceedsOracle) throw;
          std::optional<double> from_file;
          if (problem.reference_file) {
            try {
              from_file = problems::file_reference(*problem.reference_file, ei.id);
            } catch (const Error& fe) {
              if (fe.code() != ErrorCode::kMissingReferenceFile) throw;
            }
          }
          ei.reference = from_file ? *from_file : problems::constructive_reference(ei.instance).value;
        }
        break;
    }
    out.push_back(std::move(ei));
  }
  return out;
}

RunResult run(const RunConfig& cfg, const RunOptions& options, const RunHooks& hooks) {
  const auto wall_start = std::chrono::steady_clock::now();
  const auto dir = cfg.run_dir();
  fs::create_directories(dir);
  const auto log_path = dir / "log.jsonl";
  const auto transcript_path = dir / "transcript.jsonl";
  const auto checkpoint_path = dir / "checkpoint.json";

  json ck;
  if (options.resume) {
    if (!fs::exists(checkpoint_path)) {
      throw Error(ErrorCode::kIoError, fmt::format("no checkpoint in {}", dir.string()));
    }
    ck = json::parse(read_file(checkpoint_path));
    if (ck.value("version", 0) != kCheckpointVersion) throw Error(ErrorCode::kIoError, "unsupported checkpoint version");
    truncate_lines(log_path, ck.at("log_lines").get<std::size_t>());
    truncate_lines(transcript_path, ck.at("llm_calls").get<std::size_t>());
  } else {
    for (const char* name : {"log.jsonl", "transcript.jsonl", "checkpoint.json", "summary.json", "timing.json",
                             "best.json", "best_program.txt", "am.json", "heubase_stats.json"}) {
      fs::remove(dir / name);
    }
  }

  const auto kind = cfg.problem.kind;
  const auto& tags = cfg.problem.tags;
  const auto& binding = problems::binding_for(kind);
  const auto kit = prompts::PromptKit::load(cfg.prompts_dir);
  const auto heubase =
      cfg.knowledge.heubase_manifest ? knowledge::HeuBase::load_manifest(*cfg.knowledge.heubase_manifest) : knowledge::HeuBase{};
  const auto prior =
      cfg.knowledge.knobase_dir ? knowledge::knobase_text(knowledge::load_knobase(*cfg.knowledge.knobase_dir), tags) : "";

  const auto validation = build_instances(cfg.problem, cfg.problem.validation_seeds);
  const auto test = build_instances(cfg.problem, cfg.problem.test_seeds);
  std::unique_ptr<education::Evaluator> evaluator =
      hooks.evaluator ? hooks.evaluator(validation, test)
                      : std::make_unique<education::SandboxEvaluator>(kind, validation, test, cfg.calibration_fraction,
                                                                      cfg.problem.timeout_s, cfg.sandbox);

  llm::RunBudget budget(cfg.budget_mode, cfg.budget_limit, hooks.clock);
  std::unique_ptr<llm::Provider> provider;
  if (hooks.provider) {
    provider = hooks.provider();
  } else if (cfg.llm.provider == "mock") {
    provider = std::make_unique<llm::MockProvider>(llm::MockProvider::from_jsonl(cfg.llm.transcript));
  } else {
    provider = std::make_unique<llm::HttpProvider>(cfg.llm.http);
  }
  llm::Gateway gateway(std::move(provider), cfg.llm.temperatures, transcript_path);

  memory::AdaptiveMemory am(cfg.am);
  knowledge::SelectionStats stats(heubase);
  JsonlLog log(log_path, options.resume ? ck.at("log_lines").get<std::size_t>() : 0);
  auto emit = [&log](const json& event) { log.write(event); };

  auto context = [&] {
    prompts::PromptContext c;
    c.alg_type = cfg.problem.alg_type;
    c.problem = binding.name;
    c.problem_description = binding.description;
    c.baseline = binding.baseline;
    c.max_func_num = cfg.max_func_num;
    c.timeout_s = cfg.problem.timeout_s;
    c.prior_knowledge = prior;
    c.database = knowledge::render_heubase_prompt(kit, heubase, tags, am.listing());
    return c;
  };
  auto knowledge_view = [&] {
    auto view = heubase.view(tags);
    for (auto& f : am.view().functions) view.functions.push_back(std::move(f));
    return view;
  };
  const core::ParseOptions parse{cfg.max_func_num};

  int current_gen = 0;
  std::optional<core::IndividualId> best_id;
  std::optional<double> best_quality;

  auto on_evaluated = [&](const core::HeuristicIndividual& ind) {
    const auto program = core::assemble(ind, knowledge_view());
    stats.record(program);
    am.record_usage(program, current_gen);
    if (!best_quality || *ind.quality > *best_quality) {
      if (best_quality) am.record_improvement(program, *ind.quality - *best_quality);
      best_quality = ind.quality;
      best_id = ind.id;
    }
    emit({{"event", "individual"},
          {"id", ind.id},
          {"generation_born", ind.generation_born},
          {"lineage", lineage_json(ind.lineage)},
          {"quality", *ind.quality},
          {"gap_pct", education::gap_from_quality(*ind.quality, problems::sense_of(kind))},
          {"token_cost", ind.token_cost},
          {"tokens_cum", gateway.tokens()}});
  };

  education::EducationDeps edeps;
  edeps.gateway = &gateway;
  edeps.budget = &budget;
  edeps.kit = &kit;
  edeps.evaluator = evaluator.get();
  edeps.kind = kind;
  edeps.context = context;
  edeps.knowledge = knowledge_view;
  edeps.log = emit;
  edeps.parse = parse;
  education::Educator educator(cfg.education, edeps);

  memory::Namer namer = [&](const std::string& source) {
    const auto p = prompts::naming_prompt(kit, source);
    const auto r = gateway.complete({p.system, p.user, llm::Tag::kAmNaming, std::nullopt}, budget);
    return memory::parse_naming(r.text);
  };

  ga::GADeps gdeps;
  gdeps.gateway = &gateway;
  gdeps.budget = &budget;
  gdeps.init_prompt = [&] { return prompts::init_prompt(kit, context()); };
  gdeps.crossover_prompt = [&](const core::HeuristicIndividual& a, const core::HeuristicIndividual& b) {
    return prompts::crossover_prompt(kit, context(), a, b);
  };
  gdeps.mutation_prompt = [&](const core::HeuristicIndividual& cur, const std::vector<core::HeuristicIndividual>& pop) {
    return prompts::mutation_prompt(kit, context(), cur, pop);
  };
  gdeps.educate = [&](core::HeuristicIndividual ind) -> std::optional<core::HeuristicIndividual> {
    const auto id = ind.id;
    try {
      auto res = educator.educate(std::move(ind));
      on_evaluated(res.individual);
      return std::move(res.individual);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllCandidatesFailed && e.code() != ErrorCode::kFixBudgetExhausted) throw;
      emit({{"event", "education_failed"}, {"individual_id", id}, {"reason", e.what()}});
      return std::nullopt;
    }
  };
  gdeps.am_update = [&](const core::Population& pop) {
    const auto candidates = memory::candidates_from_elites(pop.members, cfg.am.elite_count);
    json events = json::array();
    if (!candidates.empty()) {
      for (const auto& ev : am.update(candidates, pop.generation, namer)) events.push_back(memory::to_json(ev));
    }
    emit({{"event", "am_update"}, {"generation", pop.generation}, {"size", am.size()}, {"events", events}});
    write_json(dir / "am.json", am.to_json(pop.generation));
  };
  gdeps.log = emit;
  gdeps.parse = parse;
  ga::Evolution evo(cfg.ga, gdeps);

  core::Population pop;
  bool exhausted = false;
  std::string termination;

  auto checkpoint = [&] {
    json members = json::array();
    for (const auto& m : pop.members) members.push_back(core::to_json(m));
    json doc = {{"version", kCheckpointVersion},
                {"run_id", cfg.run_id},
                {"generation", pop.generation},
                {"population", members},
                {"am", am.to_json(pop.generation)},
                {"budget_consumed", budget.consumed_exact()},
                {"llm_calls", gateway.calls()},
                {"tokens", gateway.tokens()},
                {"rng", evo.rng().state()},
                {"provider", gateway.provider().state()},
                {"next_id", evo.next_id()},
                {"log_lines", log.lines()},
                {"best_id", best_id ? json(*best_id) : json(nullptr)},
                {"best_quality", opt(best_quality)},
                {"budget_exhausted", exhausted},
                {"stats", stats.to_json()}};
    write_json(checkpoint_path, doc);
    write_json(dir / "am.json", am.to_json(pop.generation));
  };

  auto generation_event = [&](const std::vector<core::HeuristicIndividual>& offspring, bool am_updated) {
    json ids = json::array();
    for (const auto& m : pop.members) ids.push_back(m.id);
    json kids = json::array();
    for (const auto& o : offspring) kids.push_back({{"id", o.id}, {"lineage", lineage_json(o.lineage)}});
    emit({{"event", "generation"},
          {"generation", pop.generation},
          {"population", ids},
          {"offspring", kids},
          {"best_quality", pop.members.empty() ? json(nullptr) : opt(pop.members.front().quality)},
          {"budget_consumed", budget.consumed()},
          {"am_updated", am_updated}});
  };

  auto finish_without_best = [&](const std::string& why, const std::string& phase) {
    json summary = {{"run_id", cfg.run_id},
                    {"problem", {{"kind", problems::to_string(kind)}, {"size", cfg.problem.size}}},
                    {"best_individual_id", nullptr},
                    {"best_quality", nullptr},
                    {"best_gap_pct", nullptr},
                    {"test_mean_gap_pct", nullptr},
                    {"generations_completed", 0},
                    {"tokens_used", gateway.tokens()},
                    {"budget_mode", llm::to_string(cfg.budget_mode)},
                    {"budget_limit", cfg.budget_limit},
                    {"budget_consumed", budget.consumed()},
                    {"budget_exhausted", budget.exhausted()},
                    {"termination", why},
                    {"phase", phase}};
    emit({{"event", "run_end"}, {"summary", summary}});
    write_json(dir / "summary.json", summary);
    const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    write_json(dir / "timing.json", {{"wall_s", wall_s}});
    return RunResult{dir, summary, true};
  };

  if (options.resume) {
    pop.generation = ck.at("generation").get<int>();
    for (const auto& m : ck.at("population")) pop.members.push_back(core::individual_from_json(m));
    am = memory::AdaptiveMemory::from_json(ck.at("am"));
    budget.restore(ck.at("budget_consumed").get<double>());
    gateway.restore_counters(ck.at("llm_calls").get<std::int64_t>(), ck.at("tokens").get<std::int64_t>());
    evo.rng().restore(ck.at("rng").get<std::string>());
    gateway.provider().restore(ck.at("provider"));
    evo.set_next_id(ck.at("next_id").get<core::IndividualId>());
    if (!ck.at("best_id").is_null()) best_id = ck.at("best_id").get<core::IndividualId>();
    if (!ck.at("best_quality").is_null()) best_quality = ck.at("best_quality").get<double>();
    exhausted = ck.at("budget_exhausted").get<bool>();
    stats.restore(ck.at("stats"));
    spdlog::info("resuming {} at generation {}", cfg.run_id, pop.generation);
  } else {
    json val_ids = json::array(), test_ids = json::array();
    for (const auto& v : validation) val_ids.push_back({{"id", v.id}, {"reference", v.reference}});
    for (const auto& t : test) test_ids.push_back({{"id", t.id}, {"reference", t.reference}});
    emit({{"event", "run_start"},
          {"run_id", cfg.run_id},
          {"problem", {{"kind", problems::to_string(kind)}, {"size", cfg.problem.size}}},
          {"seed", cfg.seed},
          {"budget", {{"mode", llm::to_string(cfg.budget_mode)}, {"limit", cfg.budget_limit}}},
          {"validation", val_ids},
          {"test", test_ids}});
    core::Population initial;
    try {
      initial = evo.initialize_population(&exhausted);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kBudgetExhausted) return finish_without_best("budget_exhausted", "initialization");
      if (e.code() == ErrorCode::kAllCandidatesUnparseable) return finish_without_best("no_parseable_structure", "initialization");
      throw;
    }
    try {
      pop = evo.educate_population(initial, &exhausted);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyAfterFiltering) throw;
      return finish_without_best(exhausted ? "budget_exhausted" : "no_viable_individual", "initialization");
    }
    generation_event(initial.members, false);
    checkpoint();
  }

  bool stopped = false;
  while (!exhausted && pop.generation < cfg.ga.generations) {
    if (options.stop_after && pop.generation >= *options.stop_after) {
      stopped = true;
      break;
    }
    if (budget.exhausted()) {
      exhausted = true;
      break;
    }
    current_gen = pop.generation + 1;
    auto outcome = evo.evolve_generation(pop);
    pop = std::move(outcome.population);
    exhausted = outcome.budget_exhausted;
    generation_event(outcome.offspring, outcome.am_updated);
    checkpoint();
    spdlog::info("generation {}: best quality {}", pop.generation, pop.members.front().quality.value_or(0.0));
  }
  if (stopped) return RunResult{dir, nullptr, false};
  if (budget.exhausted()) exhausted = true;
  termination = exhausted ? "budget_exhausted" : "generations_completed";
  const auto search_consumed = budget.consumed();

  const auto& best = pop.members.front();
  const auto program = core::assemble(best, knowledge_view()) + problems::driver_suffix(kind);
  write_json(dir / "best.json", core::to_json(best));
  write_file(dir / "best_program.txt", program);

  json test_timing = json::array();
  std::optional<double> test_mean_gap;
  if (!test.empty()) {
    const auto evaluation = evaluator->evaluate(program, education::Split::kTest);
    double sum = 0.0;
    bool all_ok = !evaluation.instances.empty();
    for (const auto& r : evaluation.instances) {
      emit({{"event", "test_result"},
            {"individual_id", best.id},
            {"instance_id", r.instance_id},
            {"status", sandbox::to_string(r.status)},
            {"objective", opt(r.objective)},
            {"reference", r.reference},
            {"gap_pct", opt(r.gap_pct)}});
      test_timing.push_back({{"instance_id", r.instance_id}, {"wall_ms", r.wall_ms}});
      if (r.gap_pct) sum += *r.gap_pct;
      else all_ok = false;
    }
    if (all_ok) test_mean_gap = sum / static_cast<double>(evaluation.instances.size());
  }

  json summary = {{"run_id", cfg.run_id},
                  {"problem", {{"kind", problems::to_string(kind)}, {"size", cfg.problem.size}}},
                  {"best_individual_id", best.id},
                  {"best_quality", *best.quality},
                  {"best_gap_pct", education::gap_from_quality(*best.quality, problems::sense_of(kind))},
                  {"test_mean_gap_pct", opt(test_mean_gap)},
                  {"generations_completed", pop.generation},
                  {"tokens_used", gateway.tokens()},
                  {"budget_mode", llm::to_string(cfg.budget_mode)},
                  {"budget_limit", cfg.budget_limit},
                  {"budget_consumed", search_consumed},
                  {"budget_exhausted", exhausted},
                  {"termination", termination},
                  {"am_size", am.size()}};
  emit({{"event", "run_end"}, {"summary", summary}});
  write_json(dir / "summary.json", summary);
  write_json(dir / "am.json", am.to_json(pop.generation));
  write_json(dir / "heubase_stats.json", stats.to_json());
  const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  write_json(dir / "timing.json", {{"wall_s", wall_s}, {"test", test_timing}});
  return RunResult{dir, summary, true};
}

json bench(const RunConfig& cfg, int attempts, const RunHooks& hooks) {
  if (attempts < 1) throw Error(ErrorCode::kConfigInvalid, "bench needs at least one attempt");
  const auto root = cfg.run_dir();
  json runs = json::array();
  std::vector<double> gaps;
  for (int k = 0; k < attempts; ++k) {
    RunConfig c = cfg;
    apply_seed(c, cfg.seed + static_cast<std::uint64_t>(k));
    c.output_dir = root;
    c.run_id = fmt::format("attempt_{}", k);
    auto transcript = cfg.llm.transcript.string();
    if (auto pos = transcript.find("{attempt}"); pos != std::string::npos) {
      transcript.replace(pos, 9, std::to_string(k));
      c.llm.transcript = transcript;
    }
    json entry = {{"attempt", k}, {"seed", c.seed}, {"dir", (root / c.run_id).string()}};
    try {
      auto result = run(c, {}, hooks);
      entry["summary"] = result.summary;
      const auto& s = result.summary;
      if (s.at("best_individual_id").is_null()) {
        entry["status"] = "failed";
        entry["error"] = fmt::format("no individual was evaluated ({})", s.at("termination").get<std::string>());
        spdlog::warn("attempt {} produced no individual", k);
      } else {
        entry["status"] = "ok";
        if (!s.at("test_mean_gap_pct").is_null()) gaps.push_back(s.at("test_mean_gap_pct").get<double>());
        else if (!s.at("best_gap_pct").is_null()) gaps.push_back(s.at("best_gap_pct").get<double>());
      }
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
      spdlog::warn("attempt {} failed: {}", k, e.what());
    }
    runs.push_back(entry);
  }
  json agg = {{"attempts", runs}, {"succeeded", gaps.size()}};
  if (gaps.empty()) {
    agg["min_gap_pct"] = nullptr;
    agg["avg_gap_pct"] = nullptr;
  } else {
    double sum = 0.0, lo = gaps.front();
    for (double g : gaps) {
      sum += g;
      lo = std::min(lo, g);
    }
    agg["min_gap_pct"] = lo;
    agg["avg_gap_pct"] = sum / static_cast<double>(gaps.size());
  }
  write_json(root / "aggregate.json", agg);
  return agg;
}

}  // namespace heurgen::app
