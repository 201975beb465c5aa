#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "heurgen/education/evaluator.hpp"
#include "heurgen/llm/gateway.hpp"

namespace heurgen::testing {

struct ResponderOptions {
  std::uint64_t seed = 0;
  int min_slots = 1;
  int max_slots = 1;
  double garbage_rate = 0.0;  // unparseable replies
  double broken_rate = 0.0;   // slot bodies that raise until fixed
  /// Usage reported per reply, drawn uniformly; 0 leaves estimation to the gateway.
  std::int64_t max_usage = 0;
  /// When non-empty, structure k carries QUALITY_MARK = marks[k % size].
  std::vector<double> marks;
};

/// Deterministic stand-in for a chat model that understands the prompt kinds
/// issued during a run and answers with small TSP construction heuristics.
class Responder : public llm::Provider {
 public:
  explicit Responder(ResponderOptions options);

  llm::ChatResponse complete(const llm::ChatRequest& request, double temperature) override;
  nlohmann::json state() const override;
  void restore(const nlohmann::json& state) override;

  std::int64_t calls() const { return calls_; }
  std::int64_t max_usage_seen() const { return max_usage_seen_; }

 private:
  double uniform();
  std::string structure_reply();
  std::string fill_one_reply(const std::string& user);
  std::string fill_all_reply(const std::string& user);
  std::string fix_reply(const std::string& user);
  std::string ranges_reply(const std::string& user);
  std::string naming_reply(const std::string& user);

  ResponderOptions opt_;
  std::mt19937_64 rng_;
  std::int64_t calls_ = 0;
  std::int64_t structures_ = 0;
  std::int64_t names_ = 0;
  std::int64_t max_usage_seen_ = 0;
};

/// A TSP structure with `slots` placeholders (1..3).
std::string tsp_structure(int slots, int start, double weight, const std::vector<double>& marks_value = {});
/// A realized definition for slot `slot` (variant picks among a few strategies).
std::string tsp_impl(int slot, int variant);
std::string broken_impl(int slot);
std::string last_fenced_block(const std::string& text);

/// Scores programs without running them: QUALITY_MARK when present, else a
/// stable hash of the text. Programs containing a broken body fail.
class StubEvaluator : public education::Evaluator {
 public:
  explicit StubEvaluator(double fail_rate_salt = 0.0) : salt_(fail_rate_salt) {}
  education::Evaluation evaluate(const std::string& program, education::Split split) override;
  std::int64_t evaluations() const { return evaluations_; }

 private:
  double salt_;
  std::int64_t evaluations_ = 0;
};

std::uint64_t fnv1a(std::string_view s);

}  // namespace heurgen::testing
