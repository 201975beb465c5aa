#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "heurgen/core/model.hpp"
#include "heurgen/core/structure.hpp"
#include "heurgen/prompts/kit.hpp"

namespace heurgen::memory {

struct AMConfig {
  double alpha1 = 0.4;  // fitness
  double alpha2 = 0.3;  // novelty
  double alpha3 = 0.2;  // usage
  double alpha4 = 0.1;  // age (penalty)
  double tau = 0.8;
  double delta_th = 0.05;
  double lambda = 0.7;
  int c_max = 32;
  int t_idle = 3;  // generations without use
  double epsilon = 0.1;
  int elite_count = 3;
  double ema_beta = 0.5;

  void validate() const;
};

nlohmann::json to_json(const AMConfig& cfg);
AMConfig am_config_from_json(const nlohmann::json& doc, AMConfig base = {});

struct MemoryEntry {
  std::string name;
  std::string purpose;
  std::string signature;  // "(args)" as rendered in listings
  std::string source;     // complete definition under `name`
  double fitness = 0.0;
  std::int64_t usage_count = 0;
  int inserted_gen = 0;
  int last_used_gen = 0;
  double ema_improvement = 0.0;
  double s_last = 0.0;
  std::int64_t seq = 0;  // insertion order, breaks ties
  bool fallback_name = false;
};

/// Raw score inputs before normalization.
struct Features {
  double fit = 0.0;
  double nov = 0.0;
  double use = 0.0;
  double age = 0.0;
};

/// One function offered to the memory.
struct Candidate {
  std::string source;  // `def func_k(...)` or any single definition
  double fitness = 0.0;
  std::int64_t usage = 1;
  std::string purpose;
};

/// Token 3-shingle multiset Jaccard; the defined function's own name is
/// neutralized so renamed copies compare equal.
double similarity(std::string_view f, std::string_view g);

/// Min-max per column over `rows`; a constant column maps to 0.5.
std::vector<Features> normalize(const std::vector<Features>& rows);
double composite(const Features& normalized, const AMConfig& cfg);
double utility(const MemoryEntry& entry, const AMConfig& cfg);

/// Naming callback: returns (name, purpose, signature) or throws.
struct Naming {
  std::string name;
  std::string purpose;
  std::string signature;
};
using Namer = std::function<Naming(const std::string& source)>;

/// Parses an am_naming completion: `def name(args):` plus a docstring.
Naming parse_naming(std::string_view completion);

enum class EventKind { kInsert, kReplace, kDiscard, kEvict, kPrune, kNamingFailure };
std::string_view to_string(EventKind kind);

struct UpdateEvent {
  EventKind kind = EventKind::kInsert;
  int candidate = -1;   // index into the batch, -1 for maintenance events
  std::string target;   // entry name (stored or newly assigned)
  std::int64_t target_seq = -1;
  double sim = 0.0;
  double s_f = 0.0;
  double s_g = 0.0;
  double u_star = 0.0;
};

nlohmann::json to_json(const UpdateEvent& event);

class AdaptiveMemory {
 public:
  explicit AdaptiveMemory(AMConfig cfg = {});

  const AMConfig& config() const { return cfg_; }
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  const MemoryEntry* find(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }

  /// Runs one insertion/maintenance pass over `batch` at generation `gen`.
  std::vector<UpdateEvent> update(const std::vector<Candidate>& batch, int gen, const Namer& namer = {});

  /// Counts one individual's use of every entry its program calls.
  void record_usage(std::string_view program, int gen);
  /// EMA bookkeeping when a new best individual appears; the improvement is
  /// split among the memory functions its program calls.
  void record_improvement(std::string_view best_program, double improvement);

  std::vector<prompts::ListingEntry> listing() const;
  core::KnowledgeView view() const;

  nlohmann::json to_json(int generation) const;
  static AdaptiveMemory from_json(const nlohmann::json& doc);

  /// Raw features of the stored entries against each other (novelty within the store).
  std::vector<Features> stored_features(int gen) const;

 private:
  AMConfig cfg_;
  std::vector<MemoryEntry> entries_;
  std::int64_t next_seq_ = 0;
};

/// Committed impls of the top `elite_count` individuals, de-duplicated by
/// source; usage is the number of elites carrying the impl.
std::vector<Candidate> candidates_from_elites(const std::vector<core::HeuristicIndividual>& population,
                                              int elite_count);

}  // namespace heurgen::memory
