#include "heurgen/knowledge/store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"

namespace heurgen::knowledge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kPreConstructed: return "pre_constructed";
    case Provenance::kRetrieved: return "retrieved";
    case Provenance::kPromotedFromAm: return "promoted_from_am";
  }
  return "pre_constructed";
}

Provenance provenance_from_string(std::string_view s) {
  for (auto p : {Provenance::kPreConstructed, Provenance::kRetrieved, Provenance::kPromotedFromAm}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::kMalformedEntry, fmt::format("unknown provenance '{}'", s));
}

namespace {

std::string read_file(const fs::path& path, ErrorCode code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_entry(const HeuBaseEntry& e) {
  if (!text::is_identifier(e.name)) throw Error(ErrorCode::kMalformedEntry, fmt::format("bad name '{}'", e.name));
  if (text::trim(e.docstring).empty())
    throw Error(ErrorCode::kMalformedEntry, fmt::format("entry '{}' has an empty docstring", e.name));
  int defs = 0;
  bool named = false;
  for (const auto& line : text::split_lines(e.body)) {
    if (text::is_blank(line) || text::indentation(line) > 0) continue;
    auto t = text::trim(line);
    if (t.front() == '#' || t.front() == '@') continue;
    if (text::starts_with(t, "def ")) {
      ++defs;
      auto rest = text::trim(t.substr(4));
      named = named || (text::starts_with(rest, e.name) && rest.size() > e.name.size() &&
                        (rest[e.name.size()] == '(' || rest[e.name.size()] == ' '));
    } else if (!text::starts_with(t, "import ") && !text::starts_with(t, "from ")) {
      throw Error(ErrorCode::kMalformedEntry,
                  fmt::format("entry '{}' body has top-level code besides its definition: {}", e.name, t));
    }
  }
  if (defs != 1 || !named) {
    throw Error(ErrorCode::kMalformedEntry, fmt::format("entry '{}' body must define exactly `def {}(...)`", e.name, e.name));
  }
}

bool intersects(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return std::any_of(a.begin(), a.end(), [&](const auto& x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

}  // namespace

HeuBase::HeuBase(std::vector<HeuBaseEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string, std::less<>> seen;
  for (const auto& e : entries_) {
    check_entry(e);
    if (!seen.insert(e.name).second) throw Error(ErrorCode::kDuplicateName, fmt::format("entry '{}' appears twice", e.name));
  }
}

HeuBase HeuBase::load_manifest(const fs::path& path) {
  auto doc = json::parse(read_file(path, ErrorCode::kLoadError), nullptr, false, true);
  if (doc.is_discarded() || !doc.is_array())
    throw Error(ErrorCode::kMalformedEntry, fmt::format("{}: manifest must be a JSON array", path.string()));
  std::vector<HeuBaseEntry> entries;
  std::size_t idx = 0;
  for (const auto& item : doc) {
    try {
      HeuBaseEntry e;
      e.name = item.at("name").get<std::string>();
      e.signature = item.at("signature").get<std::string>();
      e.docstring = item.at("docstring").get<std::string>();
      e.body = read_file(path.parent_path() / item.at("body_path").get<std::string>(), ErrorCode::kMalformedEntry);
      e.tags = item.value("tags", std::vector<std::string>{});
      e.provenance = provenance_from_string(item.value("provenance", std::string("pre_constructed")));
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kMalformedEntry, fmt::format("{}: entry {}: {}", path.string(), idx, ex.what()));
    }
    ++idx;
  }
  return HeuBase(std::move(entries));
}

const HeuBaseEntry* HeuBase::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::vector<const HeuBaseEntry*> HeuBase::matching(const std::vector<std::string>& problem_tags) const {
  std::vector<const HeuBaseEntry*> out;
  for (const auto& e : entries_) {
    if (intersects(e.tags, problem_tags)) out.push_back(&e);
  }
  return out;
}

core::KnowledgeView HeuBase::view(const std::vector<std::string>& problem_tags) const {
  core::KnowledgeView v;
  for (const auto* e : matching(problem_tags)) v.functions.push_back({e->name, e->body, core::ImplOrigin::kHeuBase});
  return v;
}

std::vector<std::string> HeuBase::lint() const {
  std::vector<std::string> issues;
  for (const auto& e : entries_) {
    for (const auto& other : entries_) {
      if (&other != &e && text::calls_identifier(e.body, other.name))
        issues.push_back(fmt::format("{} calls {}; entries must be flat", e.name, other.name));
    }
  }
  return issues;
}

std::vector<KnoBaseDoc> load_knobase(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kLoadError, fmt::format("{} is not a directory", dir.string()));
  std::vector<fs::path> subdirs;
  for (const auto& d : fs::directory_iterator(dir)) {
    if (d.is_directory() && fs::exists(d.path() / "tags.json") && fs::exists(d.path() / "text.md"))
      subdirs.push_back(d.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<KnoBaseDoc> docs;
  for (const auto& d : subdirs) {
    auto tags = json::parse(read_file(d / "tags.json", ErrorCode::kLoadError), nullptr, false);
    if (tags.is_discarded() || !tags.is_array())
      throw Error(ErrorCode::kMalformedEntry, fmt::format("{}: tags.json must be an array", d.string()));
    KnoBaseDoc doc{tags.get<std::vector<std::string>>(), read_file(d / "text.md", ErrorCode::kLoadError)};
    if (text::trim(doc.text).empty()) throw Error(ErrorCode::kMalformedEntry, fmt::format("{}: empty text.md", d.string()));
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string knobase_text(const std::vector<KnoBaseDoc>& docs, const std::vector<std::string>& problem_tags) {
  std::string out;
  for (const auto& d : docs) {
    if (!intersects(d.tags, problem_tags)) continue;
    if (!out.empty()) out += "\n\n";
    out += std::string(text::trim(d.text));
  }
  return out;
}

std::vector<prompts::ListingEntry> listing_entries(const HeuBase& base, const std::vector<std::string>& problem_tags) {
  std::vector<prompts::ListingEntry> out;
  for (const auto* e : base.matching(problem_tags)) out.push_back({e->name, e->signature, e->docstring});
  return out;
}

std::string render_heubase_prompt(const prompts::PromptKit& kit, const HeuBase& base,
                                  const std::vector<std::string>& problem_tags,
                                  const std::vector<prompts::ListingEntry>& memory_entries) {
  auto entries = listing_entries(base, problem_tags);
  entries.insert(entries.end(), memory_entries.begin(), memory_entries.end());
  return prompts::render_listing(kit, entries);
}

SelectionStats::SelectionStats(const HeuBase& base) {
  for (const auto& e : base.entries()) {
    names_.push_back(e.name);
    counts_[e.name] = 0;
  }
}

void SelectionStats::record(std::string_view program) {
  std::lock_guard lock(mutex_);
  ++observed_;
  for (const auto& n : names_) {
    if (text::calls_identifier(program, n)) ++counts_[n];
  }
}

std::int64_t SelectionStats::observed() const {
  std::lock_guard lock(mutex_);
  return observed_;
}

std::int64_t SelectionStats::count(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find(name);
  return it == counts_.end() ? 0 : it->second;
}

double SelectionStats::frequency(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = counts_.find(name);
  if (it == counts_.end() || observed_ == 0) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(observed_);
}

json SelectionStats::to_json() const {
  std::lock_guard lock(mutex_);
  json entries = json::array();
  for (const auto& n : names_) {
    const auto c = counts_.at(n);
    entries.push_back({{"name", n},
                       {"selections", c},
                       {"frequency", observed_ ? static_cast<double>(c) / static_cast<double>(observed_) : 0.0}});
  }
  return {{"observed", observed_}, {"entries", entries}};
}

void SelectionStats::restore(const json& doc) {
  std::lock_guard lock(mutex_);
  observed_ = doc.at("observed").get<std::int64_t>();
  for (const auto& e : doc.at("entries")) {
    auto name = e.at("name").get<std::string>();
    if (counts_.count(name)) counts_[name] = e.at("selections").get<std::int64_t>();
  }
}

}  // namespace heurgen::knowledge
