#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "heurgen/core/model.hpp"
#include "heurgen/core/structure.hpp"
#include "heurgen/llm/gateway.hpp"
#include "heurgen/prompts/kit.hpp"

namespace heurgen::ga {

struct GAConfig {
  int init_pop_size = 4;
  int max_pop_size = 4;
  double p_c = 0.7;
  double p_m = 0.3;
  int generations = 10;  // T
  int am_interval = 2;
  std::uint64_t rng_seed = 0;
  int init_retries = 0;  // extra init requests allowed for unparseable replies

  void validate() const;
};

/// Single seeded stream for the Bernoulli draws; state is serializable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);
  bool bernoulli(double p);
  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

/// Callbacks that connect the loop to prompts, education and memory.
struct GADeps {
  llm::Gateway* gateway = nullptr;
  llm::RunBudget* budget = nullptr;
  std::function<prompts::ChatPrompt()> init_prompt;
  std::function<prompts::ChatPrompt(const core::HeuristicIndividual&, const core::HeuristicIndividual&)> crossover_prompt;
  std::function<prompts::ChatPrompt(const core::HeuristicIndividual&, const std::vector<core::HeuristicIndividual>&)>
      mutation_prompt;
  /// Returns the educated individual, or nullopt when education failed for good.
  /// May throw budget_exhausted.
  std::function<std::optional<core::HeuristicIndividual>(core::HeuristicIndividual)> educate;
  std::function<void(const core::Population&)> am_update;
  std::function<void(const nlohmann::json&)> log;
  core::ParseOptions parse;
};

struct GenerationOutcome {
  core::Population population;
  std::vector<core::HeuristicIndividual> offspring;  // as created, before education
  bool am_updated = false;
  bool budget_exhausted = false;
};

class Evolution {
 public:
  Evolution(GAConfig cfg, GADeps deps);

  /// init_pop_size exterior requests; unparseable replies are discarded.
  /// Partial populations are returned when the budget runs out.
  core::Population initialize_population(bool* budget_exhausted = nullptr);
  /// Educates every member and selects; education failures are dropped.
  core::Population educate_population(core::Population pop, bool* budget_exhausted = nullptr);
  GenerationOutcome evolve_generation(const core::Population& pop);

  const GAConfig& config() const { return cfg_; }
  Rng& rng() { return rng_; }
  core::IndividualId next_id() const { return next_id_; }
  void set_next_id(core::IndividualId id) { next_id_ = id; }

 private:
  std::optional<core::HeuristicIndividual> request_structure(const prompts::ChatPrompt& prompt, core::Lineage lineage,
                                                             int generation);
  void emit(const nlohmann::json& event) const;

  GAConfig cfg_;
  GADeps deps_;
  Rng rng_;
  core::IndividualId next_id_ = 1;
};

/// Members sorted best-first by compare_quality, unevaluated dropped, cut to
/// max_pop_size. Throws empty_after_filtering.
core::Population select(const core::Population& pop, int max_pop_size);

}  // namespace heurgen::ga
