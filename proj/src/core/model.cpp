#include "heurgen/core/model.hpp"

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/core/structure.hpp"

namespace heurgen::core {

std::string_view to_string(ImplOrigin origin) {
  switch (origin) {
    case ImplOrigin::kLlmGenerated: return "llm_generated";
    case ImplOrigin::kHeuBase: return "heubase";
    case ImplOrigin::kAdaptiveMemory: return "adaptive_memory";
  }
  return "llm_generated";
}

ImplOrigin impl_origin_from_string(std::string_view s) {
  if (s == "heubase") return ImplOrigin::kHeuBase;
  if (s == "adaptive_memory") return ImplOrigin::kAdaptiveMemory;
  if (s == "llm_generated") return ImplOrigin::kLlmGenerated;
  throw Error(ErrorCode::kParseError, fmt::format("unknown impl origin '{}'", s));
}

std::string_view to_string(Lineage::Kind kind) {
  switch (kind) {
    case Lineage::Kind::kInit: return "init";
    case Lineage::Kind::kCrossover: return "crossover";
    case Lineage::Kind::kMutation: return "mutation";
  }
  return "init";
}

namespace {

Lineage::Kind lineage_kind_from_string(std::string_view s) {
  if (s == "init") return Lineage::Kind::kInit;
  if (s == "crossover") return Lineage::Kind::kCrossover;
  if (s == "mutation") return Lineage::Kind::kMutation;
  throw Error(ErrorCode::kParseError, fmt::format("unknown lineage '{}'", s));
}

}  // namespace

bool HeuristicIndividual::fully_realized() const {
  for (const auto& slot : structure.slots) {
    if (!impls.count(slot.id)) return false;
  }
  return true;
}

std::weak_ordering compare_quality(const HeuristicIndividual& a, const HeuristicIndividual& b) {
  if (!a.quality || !b.quality) {
    throw Error(ErrorCode::kUnevaluatedOperand,
                fmt::format("cannot rank individual {} against {}", a.id, b.id));
  }
  if (*a.quality != *b.quality) {
    return *a.quality > *b.quality ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  if (a.token_cost != b.token_cost) {
    return a.token_cost < b.token_cost ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  if (a.generation_born != b.generation_born) {
    return a.generation_born < b.generation_born ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  if (a.id != b.id) return a.id < b.id ? std::weak_ordering::greater : std::weak_ordering::less;
  return std::weak_ordering::equivalent;
}

bool ranks_ahead(const HeuristicIndividual& a, const HeuristicIndividual& b) {
  return compare_quality(a, b) == std::weak_ordering::greater;
}

nlohmann::json to_json(const HeuristicIndividual& individual) {
  nlohmann::json impls = nlohmann::json::array();
  for (const auto& [id, impl] : individual.impls) {
    impls.push_back({{"slot_id", id}, {"origin", to_string(impl.origin)}, {"source", impl.source}});
  }
  nlohmann::json lineage = {{"kind", to_string(individual.lineage.kind)},
                            {"parents", individual.lineage.parents}};
  return {
      {"id", individual.id},
      {"structure_source", individual.structure.source},
      {"impls", impls},
      {"quality", individual.quality ? nlohmann::json(*individual.quality) : nlohmann::json(nullptr)},
      {"lineage", lineage},
      {"generation_born", individual.generation_born},
      {"token_cost", individual.token_cost},
  };
}

HeuristicIndividual individual_from_json(const nlohmann::json& doc) {
  HeuristicIndividual out;
  out.id = doc.at("id").get<IndividualId>();
  // a stored structure was accepted once; do not re-impose the slot limit
  ParseOptions permissive;
  permissive.max_func_num = 1 << 20;
  out.structure = parse_structure(doc.at("structure_source").get<std::string>(), permissive).structure;
  for (const auto& item : doc.at("impls")) {
    FunctionImpl impl;
    impl.slot_id = item.at("slot_id").get<int>();
    impl.origin = impl_origin_from_string(item.at("origin").get<std::string>());
    impl.source = item.at("source").get<std::string>();
    out.impls.emplace(impl.slot_id, std::move(impl));
  }
  if (!doc.at("quality").is_null()) out.quality = doc.at("quality").get<double>();
  out.lineage.kind = lineage_kind_from_string(doc.at("lineage").at("kind").get<std::string>());
  out.lineage.parents = doc.at("lineage").at("parents").get<std::vector<IndividualId>>();
  out.generation_born = doc.at("generation_born").get<int>();
  out.token_cost = doc.at("token_cost").get<std::int64_t>();
  return out;
}

}  // namespace heurgen::core
