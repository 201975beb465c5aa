#include "heurgen/ga/evolution.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"

namespace heurgen::ga {

using nlohmann::json;

void GAConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kConfigInvalid, "ga: " + m); };
  if (init_pop_size < 1) fail("init_pop_size must be at least 1");
  if (max_pop_size < 2) fail("max_pop_size must be at least 2");
  if (p_c < 0 || p_c > 1 || p_m < 0 || p_m > 1) fail("p_c and p_m must lie in [0, 1]");
  if (generations < 0) fail("generations must be non-negative");
  if (am_interval < 1) fail("am_interval must be at least 1");
  if (init_retries < 0) fail("init_retries must be non-negative");
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

bool Rng::bernoulli(double p) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return u < p;
}

std::string Rng::state() const {
  std::ostringstream ss;
  ss << engine_;
  return ss.str();
}

void Rng::restore(const std::string& state) {
  std::istringstream ss(state);
  ss >> engine_;
  if (!ss) throw Error(ErrorCode::kInvalidArgument, "corrupt RNG state");
}

core::Population select(const core::Population& pop, int max_pop_size) {
  core::Population out;
  out.generation = pop.generation;
  for (const auto& m : pop.members) {
    if (m.evaluated()) out.members.push_back(m);
  }
  if (out.members.empty()) throw Error(ErrorCode::kEmptyAfterFiltering, "no evaluated individual survived");
  std::stable_sort(out.members.begin(), out.members.end(), core::ranks_ahead);
  if (out.members.size() > static_cast<std::size_t>(max_pop_size)) out.members.resize(static_cast<std::size_t>(max_pop_size));
  return out;
}

Evolution::Evolution(GAConfig cfg, GADeps deps) : cfg_(cfg), deps_(std::move(deps)), rng_(cfg.rng_seed) {
  cfg_.validate();
  if (!deps_.gateway || !deps_.budget || !deps_.init_prompt || !deps_.crossover_prompt || !deps_.mutation_prompt ||
      !deps_.educate)
    throw Error(ErrorCode::kInvalidArgument, "evolution dependencies are incomplete");
}

void Evolution::emit(const json& event) const {
  if (deps_.log) deps_.log(event);
}

std::optional<core::HeuristicIndividual> Evolution::request_structure(const prompts::ChatPrompt& prompt,
                                                                      core::Lineage lineage, int generation) {
  auto reply = deps_.gateway->complete({prompt.system, prompt.user, llm::Tag::kGeneration, std::nullopt}, *deps_.budget);
  const auto id = next_id_++;
  try {
    auto code = llm::extract_code_block(reply.text).code;
    auto decomposed = core::decompose(code, deps_.parse);
    core::HeuristicIndividual ind;
    ind.id = id;
    ind.structure = std::move(decomposed.structure);
    ind.lineage = std::move(lineage);
    ind.generation_born = generation;
    ind.token_cost = reply.total_tokens();
    return ind;
  } catch (const Error& e) {
    emit({{"event", "discarded"},
          {"id", id},
          {"lineage", {{"kind", core::to_string(lineage.kind)}, {"parents", lineage.parents}}},
          {"reason", e.what()}});
    return std::nullopt;
  }
}

core::Population Evolution::initialize_population(bool* budget_exhausted) {
  core::Population pop;
  int requests = 0;
  const int max_requests = cfg_.init_pop_size + cfg_.init_retries;
  try {
    while (static_cast<int>(pop.members.size()) < cfg_.init_pop_size && requests < max_requests) {
      ++requests;
      if (auto ind = request_structure(deps_.init_prompt(), {core::Lineage::Kind::kInit, {}}, 0))
        pop.members.push_back(std::move(*ind));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBudgetExhausted) throw;
    if (budget_exhausted) *budget_exhausted = true;
    emit({{"event", "budget_exhausted"}, {"phase", "initialization"}, {"structures", pop.members.size()}});
    if (pop.members.empty()) throw;
    return pop;
  }
  if (pop.members.empty())
    throw Error(ErrorCode::kAllCandidatesUnparseable, fmt::format("none of {} initial structures parsed", requests));
  return pop;
}

core::Population Evolution::educate_population(core::Population pop, bool* budget_exhausted) {
  core::Population out;
  out.generation = pop.generation;
  for (auto& m : pop.members) {
    if (budget_exhausted && *budget_exhausted) break;
    try {
      if (auto educated = deps_.educate(std::move(m))) out.members.push_back(std::move(*educated));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBudgetExhausted) throw;
      if (budget_exhausted) *budget_exhausted = true;
      break;
    }
  }
  return select(out, cfg_.max_pop_size);
}

GenerationOutcome Evolution::evolve_generation(const core::Population& pop_in) {
  GenerationOutcome outcome;
  const auto sorted = select(pop_in, std::max<int>(cfg_.max_pop_size, static_cast<int>(pop_in.members.size())));
  const auto& members = sorted.members;
  const int next_gen = pop_in.generation + 1;

  std::vector<std::pair<bool, std::size_t>> crossovers;  // (fired, i)
  for (std::size_t i = 0; i + 1 < members.size(); ++i) crossovers.emplace_back(rng_.bernoulli(cfg_.p_c), i);
  std::vector<bool> mutations;
  for (std::size_t i = 0; i < members.size(); ++i) mutations.push_back(rng_.bernoulli(cfg_.p_m));
  json draws = {{"crossover", json::array()}, {"mutation", mutations}};
  for (const auto& [fired, i] : crossovers) draws["crossover"].push_back(fired);
  emit({{"event", "draws"}, {"generation", next_gen}, {"draws", draws}});

  try {
    for (const auto& [fired, i] : crossovers) {
      if (!fired) continue;
      const auto& a = members[i];
      const auto& b = members[i + 1];
      if (auto child = request_structure(deps_.crossover_prompt(a, b), {core::Lineage::Kind::kCrossover, {a.id, b.id}},
                                         next_gen))
        outcome.offspring.push_back(std::move(*child));
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!mutations[i]) continue;
      const auto& cur = members[i];
      if (auto child = request_structure(deps_.mutation_prompt(cur, members),
                                         {core::Lineage::Kind::kMutation, {cur.id, members.front().id}}, next_gen))
        outcome.offspring.push_back(std::move(*child));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBudgetExhausted) throw;
    outcome.budget_exhausted = true;
  }

  core::Population merged;
  merged.generation = next_gen;
  merged.members = members;
  if (!outcome.budget_exhausted) {
    for (const auto& child : outcome.offspring) {
      try {
        if (auto educated = deps_.educate(child)) merged.members.push_back(std::move(*educated));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBudgetExhausted) throw;
        outcome.budget_exhausted = true;
        break;
      }
    }
  }
  outcome.population = select(merged, cfg_.max_pop_size);
  outcome.population.generation = next_gen;
  if (!outcome.budget_exhausted && next_gen % cfg_.am_interval == 0 && deps_.am_update) {
    deps_.am_update(outcome.population);
    outcome.am_updated = true;
  }
  return outcome;
}

}  // namespace heurgen::ga
