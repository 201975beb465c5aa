#include <cmath>
#include <map>
#include <random>
#include <regex>

#include <fmt/format.h>

#include "heurgen/calibration/cmaes.hpp"
#include "heurgen/common/error.hpp"
#include "heurgen/core/structure.hpp"
#include "heurgen/education/educate.hpp"
#include "checks.hpp"
#include "responder.hpp"

namespace heurgen::acceptance {

using nlohmann::json;

namespace {

const prompts::PromptKit& kit() {
  static const prompts::PromptKit k = prompts::PromptKit::load(prompts_dir());
  return k;
}

struct SlotScan {
  std::map<int, std::optional<double>> qualities;  // candidate index -> quality when it succeeded
  std::optional<int> committed;
};

std::string argmax_violation(const education::SlotSearchRecord& rec) {
  if (rec.chosen_index < 0) return {};
  const auto& chosen = rec.candidates.at(static_cast<std::size_t>(rec.chosen_index));
  if (!chosen.quality) return "chosen candidate has no quality";
  for (const auto& c : rec.candidates) {
    if (c.quality && *c.quality > *chosen.quality)
      return fmt::format("candidate {} scored {} above the chosen {}", c.candidate_idx, *c.quality, *chosen.quality);
  }
  return {};
}

}  // namespace

Outcome education_argmax() {
  constexpr int kRuns = 1000;
  int records = 0, failed_runs = 0, multi_success = 0;
  const double broken[] = {0.0, 0.3, 0.6};
  for (int i = 0; i < kRuns; ++i) {
    testing::ResponderOptions o;
    o.seed = static_cast<std::uint64_t>(i);
    o.min_slots = 1;
    o.max_slots = 3;
    o.garbage_rate = i % 4 == 0 ? 0.25 : 0.0;
    o.broken_rate = broken[i % 3];
    llm::Gateway gateway(std::make_unique<testing::Responder>(o));
    llm::RunBudget budget(llm::BudgetMode::kTokens, 100'000'000);
    testing::StubEvaluator evaluator(i * 0.001);
    std::vector<json> events;

    education::EducationConfig cfg;
    cfg.mc_func_pop = 1 + i % 4;
    cfg.max_fix_try = i % 3;
    cfg.calibration = i % 7 == 0;
    cfg.calibration_evals = 6;
    cfg.seed = static_cast<std::uint64_t>(i);
    education::EducationDeps deps;
    deps.gateway = &gateway;
    deps.budget = &budget;
    deps.kit = &kit();
    deps.evaluator = &evaluator;
    deps.context = [] {
      prompts::PromptContext c;
      c.problem = "TSP";
      return c;
    };
    deps.knowledge = [] { return core::KnowledgeView{}; };
    deps.log = [&](const json& e) { events.push_back(e); };
    education::Educator educator(cfg, deps);

    core::HeuristicIndividual ind;
    ind.id = i + 1;
    ind.structure = core::decompose(testing::tsp_structure(1 + i % 3, i % 4, 0.5)).structure;
    try {
      auto result = educator.educate(ind);
      for (const auto& rec : result.records) {
        if (auto v = argmax_violation(rec); !v.empty()) return {false, fmt::format("run {} slot {}: {}", i, rec.slot_id, v)};
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllCandidatesFailed) return {false, fmt::format("run {}: {}", i, e.what())};
      ++failed_runs;
    }

    // the log covers failed educations too
    std::map<int, SlotScan> slots;
    for (const auto& e : events) {
      const auto kind = e.value("event", "");
      if (kind == "slot_candidate") {
        auto& s = slots[e.at("slot_id").get<int>()];
        const auto& q = e.at("quality");
        s.qualities[e.at("candidate_idx").get<int>()] = q.is_null() ? std::nullopt : std::optional<double>(q.get<double>());
      } else if (kind == "slot_commit") {
        slots[e.at("slot_id").get<int>()].committed = e.at("chosen_index").get<int>();
      }
    }
    for (const auto& [slot, s] : slots) {
      ++records;
      int successes = 0;
      std::optional<double> best;
      for (const auto& [idx, q] : s.qualities) {
        if (!q) continue;
        ++successes;
        best = best ? std::max(*best, *q) : *q;
      }
      multi_success += successes > 1;
      if (!s.committed) {
        if (successes > 0) return {false, fmt::format("run {} slot {}: successes but nothing committed", i, slot)};
        continue;
      }
      auto it = s.qualities.find(*s.committed);
      if (it == s.qualities.end() || !it->second)
        return {false, fmt::format("run {} slot {}: committed candidate {} did not succeed", i, slot, *s.committed)};
      if (*it->second < *best)
        return {false, fmt::format("run {} slot {}: committed {} below best {}", i, slot, *it->second, *best)};
    }
  }
  if (multi_success == 0) return {false, "no record had two successful candidates"};
  return {true, fmt::format("{} slot records over {} educations ({} all-failed, {} with competing successes), zero "
                            "violations",
                            records, kRuns, failed_runs, multi_success)};
}

Outcome calibration_safety() {
  constexpr int kRuns = 100;
  const char* max_times[] = {"60", "30", "10.5", "2", "120.0"};
  int improved = 0;
  for (int i = 0; i < kRuns; ++i) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(7000 + i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::string max_time = max_times[i % 5];
    const double a0 = std::round(unit(rng) * 100) / 100, b0 = std::round(unit(rng) * 100) / 100;
    const int k0 = static_cast<int>(rng() % 6);
    const std::string source = fmt::format(
        "import math\n\n#Hyperparameter#\nMAX_TIME = {}\nALPHA = {}\nK = {}  # int\nBETA = {}\n#Hyperparameter#\n\n\n"
        "def func_1(x):\n    # Purpose: step\n    pass\n\n\ndef heuristic(x):\n    return func_1(x)\n",
        max_time, core::hyper_literal(a0, false), k0, core::hyper_literal(b0, false));
    const auto structure = core::parse_structure(source).structure;
    const std::string max_time_line = "MAX_TIME = " + max_time + "\n";
    if (source.find(max_time_line) == std::string::npos) return {false, "fixture lost its MAX_TIME line"};

    const double a_star = unit(rng), b_star = unit(rng);
    const int k_star = static_cast<int>(rng() % 6);
    auto planted = [=](const core::StructureCode& s) {
      const double a = s.find_hyper("ALPHA")->value, b = s.find_hyper("BETA")->value, k = s.find_hyper("K")->value;
      return -(a - a_star) * (a - a_star) - 0.05 * (k - k_star) * (k - k_star) - 0.5 * (b - b_star) * (b - b_star);
    };
    calibration::QualityFn search = [=](const core::StructureCode& s) -> std::optional<double> { return planted(s); };
    calibration::QualityFn confirm = search;
    if (i % 3 == 0) {
      confirm = [=](const core::StructureCode& s) -> std::optional<double> { return planted(s) - 0.02; };
    } else if (i % 3 == 1) {
      confirm = [=](const core::StructureCode& s) -> std::optional<double> {
        return planted(s) + static_cast<double>(testing::fnv1a(s.source) % 1000) / 1e4 - 0.05;
      };
    }

    const std::string reply = fmt::format(
        "Ranges:\n```python\npms_dict = {{\n    \"MAX_TIME\": (1, 600),\n    \"ALPHA\": ({}, {}),\n    \"K\": (0, {}),\n"
        "    \"BETA\": (0.0, 1.0),\n}}\n```",
        i % 2 ? 0.0 : -0.5, 1.0 + 0.1 * (i % 4), 5 + i % 3);
    auto ranges = calibration::parse_ranges(reply, structure);
    for (const auto& r : ranges.ranges) {
      if (r.name == "MAX_TIME") return {false, "MAX_TIME survived range parsing"};
    }
    const double pre = *confirm(structure);
    calibration::CalibrationOptions opt;
    opt.max_evals = 10 + i % 50;
    opt.seed = static_cast<std::uint64_t>(i);
    auto r = calibration::calibrate(structure, pre, ranges.ranges, search, confirm, opt);

    if (r.post_quality < r.pre_quality) return {false, fmt::format("run {}: post {} < pre {}", i, r.post_quality, r.pre_quality)};
    const double post_check = *confirm(r.structure);
    if (post_check < pre) return {false, fmt::format("run {}: returned structure scores {} < {}", i, post_check, pre)};
    if (!r.improved && r.structure.source != structure.source)
      return {false, fmt::format("run {}: rejected calibration still changed the source", i)};
    if (r.structure.source.find(max_time_line) == std::string::npos ||
        r.structure.find_hyper("MAX_TIME")->literal != max_time)
      return {false, fmt::format("run {}: MAX_TIME changed", i)};
    const auto* k = r.structure.find_hyper("K");
    static const std::regex int_line(R"(\nK = (-?[0-9]+)  # int\n)");
    if (!k || k->value != std::floor(k->value) || !std::regex_search(r.structure.source, int_line))
      return {false, fmt::format("run {}: K is not integral", i)};
    improved += r.improved;
  }
  return {true, fmt::format("{} calibrations ({} accepted): never worse, MAX_TIME untouched, integers integral", kRuns,
                            improved)};
}

}  // namespace heurgen::acceptance
