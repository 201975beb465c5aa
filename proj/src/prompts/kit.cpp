#include "heurgen/prompts/kit.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"
#include "heurgen/core/structure.hpp"

namespace heurgen::prompts {

const std::vector<TemplateInfo>& catalog() {
  static const std::vector<TemplateInfo> entries = {
      {"system_generator", {}, {"expert in the domain of optimization heuristics", "Format your code as a Python code string"}},
      {"exterior_user_generator",
       {"alg_type", "problem", "problem_description", "baseline", "max_func_pop", "timeout", "prior_knowledge"},
       {"heuristic database", "modularization programming", "#Hyperparameter#", "# int", "func_{id}", "MAX_TIME = ",
        "-second-clock", "You MUSTN'T implement these functions", "The {id} must start from 1"}},
      {"crossover",
       {"exterior_user_generator", "worse_code", "better_code"},
       {"[Worse code]", "[Better code]", "[Improved code]", "#Hyperparameter#", "modularization programming",
        "reflect on why the latter one perform better"}},
      {"mutation",
       {"exterior_user_generator", "now_structure", "elitist_structure"},
       {"[Now Structure]", "[Elitist Code]", "[Improved code]", "#Hyperparameter#", "modularization programming",
        "mutated structure based on the Now Structure"}},
      {"fill_1func",
       {"problem", "problem_description", "id", "code_before", "prior_knowledge"},
       {"Critical Reminder", "think out of box and explore a different way", "Your response MUST contain the ENTIRE algorithm code",
        "Preserve ALL other code exactly as provided"}},
      {"fill_allFunc",
       {"problem", "problem_description", "prior_knowledge"},
       {"Critical Reminder", "implement all the functions named func_i()", "heuristic database",
        "Preserve ALL other code exactly as provided"}},
      {"fix", {"error_msg"}, {"Please fix it.", "You can't change MAX_TIME", "Don't remove hyperparameters!", "output the entire code"}},
      {"fix_system", {}, {"expert in debugging", "Format your code as a Python code string"}},
      {"ask_pms_interval", {}, {"must be named pms_dict", "a tuple (start, end)"}},
      {"ask_pms_system", {}, {"expert in hyperparameter optimization", "python dictionary"}},
      {"am_naming", {"function_code"}, {"give a name of this function", "Args:", "Out:"}},
      {"heubase_common", {}, {"heuristic database", "Do not reimplement these functions", "Simply call them by name"}},
      {"prior_knowledge", {"prior_knowledge"}, {"prior expert knowledge"}},
      {"problem_description", {"problem_description"}, {"The problem description is as follows:"}},
      {"func_generation", {}, {"expert in heuristic design", "complete heuristic code"}},
  };
  return entries;
}

const TemplateInfo& template_info(std::string_view name) {
  for (const auto& s : catalog()) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kUnknownTemplate, fmt::format("no template named '{}'", name));
}

namespace {

template <typename OnText, typename OnField>
void scan(std::string_view body, OnText on_text, OnField on_field) {
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if ((c == '{' || c == '}') && i + 1 < body.size() && body[i + 1] == c) {
      on_text(std::string_view(&body[i], 1));
      i += 2;
      continue;
    }
    if (c == '{') {
      auto close = body.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto name = body.substr(i + 1, close - i - 1);
        if (text::is_identifier(name)) {
          on_field(name);
          i = close + 1;
          continue;
        }
      }
    }
    on_text(body.substr(i, 1));
    ++i;
  }
}

}  // namespace

std::vector<std::string> placeholders_in(std::string_view body) {
  std::vector<std::string> out;
  scan(
      body, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
      });
  return out;
}

std::string substitute(std::string_view body, const Fields& fields) {
  std::string out;
  out.reserve(body.size());
  scan(
      body, [&](std::string_view t) { out.append(t); },
      [&](std::string_view name) {
        auto it = fields.find(name);
        if (it == fields.end()) throw Error(ErrorCode::kMissingPlaceholder, fmt::format("no value for {{{}}}", name));
        out.append(it->second);
      });
  return out;
}

PromptKit PromptKit::load(const std::filesystem::path& dir) {
  std::map<std::string, std::string, std::less<>> bodies;
  for (const auto& info : catalog()) {
    auto path = dir / (info.name + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kUnknownTemplate, fmt::format("missing template file {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    bodies.emplace(info.name, std::move(body));
  }
  return from_bodies(std::move(bodies));
}

PromptKit PromptKit::from_bodies(std::map<std::string, std::string, std::less<>> bodies) {
  PromptKit kit;
  kit.bodies_ = std::move(bodies);
  return kit;
}

const std::string& PromptKit::body(std::string_view name) const {
  auto it = bodies_.find(name);
  if (it == bodies_.end()) throw Error(ErrorCode::kUnknownTemplate, fmt::format("no template named '{}'", name));
  return it->second;
}

std::string PromptKit::render(std::string_view name, const Fields& fields) const {
  const auto& info = template_info(name);
  for (const auto& p : info.placeholders) {
    if (!fields.count(p)) {
      throw Error(ErrorCode::kMissingPlaceholder, fmt::format("template '{}' needs {{{}}}", name, p));
    }
  }
  return substitute(body(name), fields);
}

std::vector<LintIssue> PromptKit::lint() const {
  std::vector<LintIssue> issues;
  for (const auto& info : catalog()) {
    auto it = bodies_.find(info.name);
    if (it == bodies_.end()) {
      issues.push_back({info.name, "template file missing"});
      continue;
    }
    const auto used = placeholders_in(it->second);
    for (const auto& p : used) {
      if (std::find(info.placeholders.begin(), info.placeholders.end(), p) == info.placeholders.end())
        issues.push_back({info.name, fmt::format("undeclared placeholder {{{}}}", p)});
    }
    for (const auto& p : info.placeholders) {
      if (std::find(used.begin(), used.end(), p) == used.end())
        issues.push_back({info.name, fmt::format("declared placeholder {{{}}} is never used", p)});
    }
    Fields probe;
    for (const auto& p : info.placeholders) probe[p] = "";
    for (const auto& p : used) probe.try_emplace(p, "");
    if (info.name == "crossover" || info.name == "mutation") {
      probe["exterior_user_generator"] = substitute(body("exterior_user_generator"), [&] {
        Fields f;
        for (const auto& q : template_info("exterior_user_generator").placeholders) f[q] = "";
        return f;
      }());
    }
    const std::string rendered = substitute(it->second, probe);
    for (const auto& frag : info.fragments) {
      if (!text::contains(rendered, frag)) issues.push_back({info.name, fmt::format("fragment missing: \"{}\"", frag)});
    }
  }
  return issues;
}

std::string fence(std::string_view code) {
  std::string body(text::trim_right(code));
  return "```python\n" + body + "\n```";
}

std::string render_listing(const PromptKit& kit, const std::vector<ListingEntry>& entries) {
  if (entries.empty()) return {};
  std::string out = kit.render("heubase_common", {});
  for (const auto& e : entries) {
    std::string sig = std::string(text::trim(e.signature));
    if (sig.empty() || sig.front() != '(') sig = "(" + sig + ")";
    std::string block = fmt::format("def {}{}:\n    \"\"\"\n", e.name, sig);
    for (const auto& line : text::split_lines(text::trim_right(e.docstring))) {
      block += line.empty() ? "\n" : "    " + line + "\n";
    }
    block += "    \"\"\"";
    out += "\n\n" + fence(block);
  }
  return out;
}

namespace {

std::string optional_section(const PromptKit& kit, std::string_view name, const std::string& value) {
  if (text::trim(value).empty()) return {};
  return kit.render(name, {{std::string(name), value}});
}

std::string join_nonempty(std::initializer_list<std::string> parts) {
  std::string out;
  for (const auto& p : parts) {
    if (text::trim(p).empty()) continue;
    if (!out.empty()) out += "\n\n";
    out += p;
  }
  return out;
}

void require_evaluated(const core::HeuristicIndividual& ind) {
  if (!ind.evaluated())
    throw Error(ErrorCode::kUnevaluatedParent, fmt::format("individual {} has no quality", ind.id));
}

}  // namespace

std::string render_exterior(const PromptKit& kit, const PromptContext& ctx) {
  return kit.render("exterior_user_generator",
                    {{"alg_type", ctx.alg_type},
                     {"problem", ctx.problem},
                     {"problem_description", ctx.problem_description},
                     {"baseline", ctx.baseline},
                     {"max_func_pop", std::to_string(ctx.max_func_num)},
                     {"timeout", std::to_string(ctx.timeout_s)},
                     {"prior_knowledge", optional_section(kit, "prior_knowledge", ctx.prior_knowledge)}});
}

std::string render_crossover(const PromptKit& kit, std::string_view base, std::string_view worse_source,
                             std::string_view better_source) {
  return kit.render("crossover", {{"exterior_user_generator", std::string(base)},
                                  {"worse_code", fence(core::strip_to_stubs(worse_source))},
                                  {"better_code", fence(core::strip_to_stubs(better_source))}});
}

std::string render_mutation(const PromptKit& kit, std::string_view base, std::string_view current_source,
                            std::string_view elite_source) {
  return kit.render("mutation", {{"exterior_user_generator", std::string(base)},
                                 {"now_structure", fence(core::strip_to_stubs(current_source))},
                                 {"elitist_structure", fence(core::strip_to_stubs(elite_source))}});
}

ChatPrompt init_prompt(const PromptKit& kit, const PromptContext& ctx) {
  return {kit.render("system_generator", {}), join_nonempty({render_exterior(kit, ctx), ctx.database})};
}

ChatPrompt crossover_prompt(const PromptKit& kit, const PromptContext& ctx, const core::HeuristicIndividual& a,
                            const core::HeuristicIndividual& b) {
  require_evaluated(a);
  require_evaluated(b);
  const auto& better = core::ranks_ahead(a, b) ? a : b;
  const auto& worse = &better == &a ? b : a;
  auto user = render_crossover(kit, render_exterior(kit, ctx), worse.structure.source, better.structure.source);
  return {kit.render("system_generator", {}), join_nonempty({user, ctx.database})};
}

ChatPrompt mutation_prompt(const PromptKit& kit, const PromptContext& ctx, const core::HeuristicIndividual& current,
                           const std::vector<core::HeuristicIndividual>& population) {
  if (population.empty()) throw Error(ErrorCode::kEmptyPopulation, "mutation needs an elite");
  const core::HeuristicIndividual* elite = nullptr;
  for (const auto& m : population) {
    require_evaluated(m);
    if (!elite || core::ranks_ahead(m, *elite)) elite = &m;
  }
  auto user = render_mutation(kit, render_exterior(kit, ctx), current.structure.source, elite->structure.source);
  return {kit.render("system_generator", {}), join_nonempty({user, ctx.database})};
}

ChatPrompt fill_one_prompt(const PromptKit& kit, const PromptContext& ctx, int slot_id, std::string_view program,
                           const std::vector<std::string>& previous_candidates) {
  std::string before;
  for (const auto& c : previous_candidates) {
    if (!before.empty()) before += "\n\n";
    before += fence(c);
  }
  auto user = kit.render("fill_1func",
                         {{"problem", ctx.problem},
                          {"problem_description", optional_section(kit, "problem_description", ctx.problem_description)},
                          {"id", std::to_string(slot_id)},
                          {"code_before", before},
                          {"prior_knowledge", optional_section(kit, "prior_knowledge", ctx.prior_knowledge)}});
  return {kit.render("func_generation", {}), join_nonempty({user, ctx.database, fence(program)})};
}

ChatPrompt fill_all_prompt(const PromptKit& kit, const PromptContext& ctx, std::string_view program) {
  auto user = kit.render("fill_allFunc",
                         {{"problem", ctx.problem},
                          {"problem_description", optional_section(kit, "problem_description", ctx.problem_description)},
                          {"prior_knowledge", optional_section(kit, "prior_knowledge", ctx.prior_knowledge)}});
  return {kit.render("func_generation", {}), join_nonempty({user, ctx.database, fence(program)})};
}

ChatPrompt fix_prompt(const PromptKit& kit, const PromptContext& ctx, std::string_view error_msg,
                      std::string_view program) {
  auto user = kit.render("fix", {{"error_msg", std::string(text::trim(error_msg))}});
  return {kit.render("fix_system", {}), join_nonempty({user, ctx.database, fence(program)})};
}

ChatPrompt ask_ranges_prompt(const PromptKit& kit, std::string_view program) {
  return {kit.render("ask_pms_system", {}), join_nonempty({kit.render("ask_pms_interval", {}), fence(program)})};
}

ChatPrompt naming_prompt(const PromptKit& kit, std::string_view function_code) {
  return {kit.render("system_generator", {}), kit.render("am_naming", {{"function_code", fence(function_code)}})};
}

}  // namespace heurgen::prompts
