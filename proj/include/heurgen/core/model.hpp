#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace heurgen::core {

/// Upper bound on function placeholders per structure (max_func_num).
inline constexpr int kDefaultMaxFuncNum = 4;

inline constexpr std::string_view kHyperMarker = "#Hyperparameter#";
inline constexpr std::string_view kMaxTimeName = "MAX_TIME";

using IndividualId = std::int64_t;

/// One assignment between the two hyperparameter markers. `literal` keeps
/// the exact source text so untouched values re-serialize bit-identically.
struct HyperParam {
  std::string name;
  std::string literal;
  double value = 0.0;
  bool is_integer = false;

  friend bool operator==(const HyperParam&, const HyperParam&) = default;
};

struct FunctionSlot {
  int id = 0;
  std::string purpose;
  std::string signature;

  friend bool operator==(const FunctionSlot&, const FunctionSlot&) = default;
};

/// Program text whose `func_<id>` definitions are unimplemented stubs.
struct StructureCode {
  std::string source;
  std::vector<HyperParam> hyper_block;
  std::vector<FunctionSlot> slots;
  double max_time_s = 0.0;

  const HyperParam* find_hyper(std::string_view name) const;
  const FunctionSlot* find_slot(int id) const;
};

enum class ImplOrigin { kLlmGenerated, kHeuBase, kAdaptiveMemory };

std::string_view to_string(ImplOrigin origin);
ImplOrigin impl_origin_from_string(std::string_view s);

struct FunctionImpl {
  int slot_id = 0;
  std::string source;  // a complete `def func_<id>(...)` definition
  ImplOrigin origin = ImplOrigin::kLlmGenerated;

  friend bool operator==(const FunctionImpl&, const FunctionImpl&) = default;
};

struct Lineage {
  enum class Kind { kInit, kCrossover, kMutation };
  Kind kind = Kind::kInit;
  std::vector<IndividualId> parents;

  friend bool operator==(const Lineage&, const Lineage&) = default;
};

std::string_view to_string(Lineage::Kind kind);

struct HeuristicIndividual {
  IndividualId id = 0;
  StructureCode structure;
  std::map<int, FunctionImpl> impls;
  std::optional<double> quality;  // higher is better
  Lineage lineage;
  int generation_born = 0;
  std::int64_t token_cost = 0;

  bool fully_realized() const;
  bool evaluated() const { return quality.has_value(); }
};

struct Population {
  int generation = 0;
  std::vector<HeuristicIndividual> members;
};

/// Total order on evaluated individuals. `std::weak_ordering::greater` means
/// `a` ranks ahead of `b`: higher quality, then lower token cost, then
/// earlier birth generation, then lower id. Throws unevaluated_operand.
std::weak_ordering compare_quality(const HeuristicIndividual& a, const HeuristicIndividual& b);

/// Strict "ranks ahead of" predicate suitable for std::sort.
bool ranks_ahead(const HeuristicIndividual& a, const HeuristicIndividual& b);

nlohmann::json to_json(const HeuristicIndividual& individual);
HeuristicIndividual individual_from_json(const nlohmann::json& doc);

}  // namespace heurgen::core
