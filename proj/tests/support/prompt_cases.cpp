#include "prompt_cases.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "heurgen/core/model.hpp"
#include "heurgen/core/structure.hpp"
#include "responder.hpp"

namespace heurgen::testing {

namespace {

prompts::PromptContext context() {
  prompts::PromptContext ctx;
  ctx.problem = "Traveling Salesman Problem";
  ctx.problem_description = "Visit every city once and return to the start with the shortest closed tour.";
  ctx.baseline = "def heuristic(coords):\n    return list(range(len(coords)))";
  ctx.max_func_num = 4;
  ctx.timeout_s = 60;
  ctx.prior_knowledge = "2-opt removes crossing edges.";
  return ctx;
}

core::HeuristicIndividual individual(core::IndividualId id, double quality, int slots, double weight) {
  core::HeuristicIndividual ind;
  ind.id = id;
  ind.quality = quality;
  auto src = tsp_structure(slots, 0, weight);
  auto d = core::decompose(src);
  ind.structure = d.structure;
  for (const auto& s : d.structure.slots) ind.impls[s.id] = {s.id, tsp_impl(s.id, 1), core::ImplOrigin::kLlmGenerated};
  return ind;
}

}  // namespace

std::vector<PromptCase> prompt_cases(const prompts::PromptKit& kit) {
  using namespace prompts;
  auto ctx = context();
  auto with_db = ctx;
  with_db.database = render_listing(kit, {{"two_opt", "(coords, tour)", "Improve a tour with 2-opt moves.\nArgs: coords, tour\nOut: tour"}});
  const auto program = tsp_structure(2, 1, 0.25);
  auto worse = individual(1, -0.2, 2, 0.1);
  auto better = individual(2, -0.1, 1, 0.3);
  auto third = individual(3, -0.5, 3, 0.7);

  std::vector<PromptCase> cases;
  cases.push_back({"init", {"system_generator", "exterior_user_generator"}, init_prompt(kit, ctx)});
  cases.push_back({"init_database", {"system_generator", "exterior_user_generator", "heubase_common"}, init_prompt(kit, with_db)});
  cases.push_back({"crossover", {"system_generator", "crossover"}, crossover_prompt(kit, ctx, better, worse)});
  cases.push_back({"mutation", {"system_generator", "mutation"}, mutation_prompt(kit, ctx, third, {worse, better, third})});
  cases.push_back({"fill_1func", {"func_generation", "fill_1func"}, fill_one_prompt(kit, ctx, 2, program, {})});
  cases.push_back({"fill_1func_previous",
                   {"func_generation", "fill_1func"},
                   fill_one_prompt(kit, with_db, 1, program, {tsp_impl(1, 0), tsp_impl(1, 2)})});
  cases.push_back({"fill_allFunc", {"func_generation", "fill_allFunc"}, fill_all_prompt(kit, ctx, program)});
  cases.push_back({"fix", {"fix_system", "fix"}, fix_prompt(kit, ctx, "ZeroDivisionError: division by zero", program)});
  cases.push_back({"ask_pms", {"ask_pms_system", "ask_pms_interval"}, ask_ranges_prompt(kit, program)});
  cases.push_back({"am_naming", {"system_generator", "am_naming"}, naming_prompt(kit, tsp_impl(2, 1))});
  return cases;
}

std::string snapshot_text(const PromptCase& c) {
  return "=== system ===\n" + c.prompt.system + "\n=== user ===\n" + c.prompt.user + "\n";
}

std::vector<std::string> check_prompt_cases(const prompts::PromptKit& kit, const std::filesystem::path& snapshot_dir) {
  std::vector<std::string> problems;
  const auto cases = prompt_cases(kit);
  const auto again = prompt_cases(kit);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    if (snapshot_text(c) != snapshot_text(again[i])) problems.push_back(fmt::format("{}: render is not repeatable", c.name));
    const auto all = c.prompt.system + "\n" + c.prompt.user;
    for (const auto& t : c.templates) {
      for (const auto& frag : prompts::template_info(t).fragments) {
        if (all.find(frag) == std::string::npos) problems.push_back(fmt::format("{}: missing \"{}\"", c.name, frag));
      }
    }
    std::ifstream in(snapshot_dir / (c.name + ".txt"), std::ios::binary);
    if (!in) {
      problems.push_back(fmt::format("{}: no snapshot", c.name));
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (ss.str() != snapshot_text(c)) problems.push_back(fmt::format("{}: snapshot differs", c.name));
  }
  return problems;
}

}  // namespace heurgen::testing
