#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "heurgen/core/structure.hpp"
#include "heurgen/prompts/kit.hpp"

namespace heurgen::knowledge {

enum class Provenance { kPreConstructed, kRetrieved, kPromotedFromAm };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct HeuBaseEntry {
  std::string name;
  std::string signature;
  std::string docstring;
  std::string body;
  std::vector<std::string> tags;
  Provenance provenance = Provenance::kPreConstructed;
};

/// Immutable after load; entries keep manifest order.
class HeuBase {
 public:
  HeuBase() = default;
  explicit HeuBase(std::vector<HeuBaseEntry> entries);

  /// JSON array of {name, signature, docstring, body_path, tags, provenance};
  /// body paths resolve against the manifest directory.
  static HeuBase load_manifest(const std::filesystem::path& path);

  const std::vector<HeuBaseEntry>& entries() const { return entries_; }
  const HeuBaseEntry* find(std::string_view name) const;
  std::vector<const HeuBaseEntry*> matching(const std::vector<std::string>& problem_tags) const;
  core::KnowledgeView view(const std::vector<std::string>& problem_tags) const;
  /// Flat-entry violations: an entry body calling another entry.
  std::vector<std::string> lint() const;

 private:
  std::vector<HeuBaseEntry> entries_;
};

struct KnoBaseDoc {
  std::vector<std::string> tags;
  std::string text;
};

/// Every subdirectory of `dir` holding tags.json and text.md.
std::vector<KnoBaseDoc> load_knobase(const std::filesystem::path& dir);
/// Texts of the documents whose tags intersect `problem_tags`.
std::string knobase_text(const std::vector<KnoBaseDoc>& docs, const std::vector<std::string>& problem_tags);

std::vector<prompts::ListingEntry> listing_entries(const HeuBase& base, const std::vector<std::string>& problem_tags);

/// HeuBase blocks (manifest order) then `memory_entries`, under the
/// heubase_common header; empty when nothing matches.
std::string render_heubase_prompt(const prompts::PromptKit& kit, const HeuBase& base,
                                  const std::vector<std::string>& problem_tags,
                                  const std::vector<prompts::ListingEntry>& memory_entries = {});

/// Per-entry selection counters.
class SelectionStats {
 public:
  explicit SelectionStats(const HeuBase& base);

  void record(std::string_view program);
  std::int64_t observed() const;
  std::int64_t count(std::string_view name) const;
  double frequency(std::string_view name) const;
  nlohmann::json to_json() const;
  void restore(const nlohmann::json& doc);

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::int64_t, std::less<>> counts_;
  std::int64_t observed_ = 0;
  mutable std::mutex mutex_;
};

}  // namespace heurgen::knowledge
