#include "heurgen/memory/adaptive_memory.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"

namespace heurgen::memory {

using nlohmann::json;

void AMConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kConfigInvalid, "am: " + m); };
  if (alpha1 < 0 || alpha2 < 0 || alpha3 < 0 || alpha4 < 0) fail("alpha weights must be non-negative");
  if (tau < 0 || tau > 1) fail("tau must lie in [0, 1]");
  if (delta_th < 0) fail("delta_th must be non-negative");
  if (lambda < 0 || lambda > 1) fail("lambda must lie in [0, 1]");
  if (c_max < 1) fail("c_max must be at least 1");
  if (t_idle < 0) fail("t_idle must be non-negative");
  if (elite_count < 1) fail("elite_count must be at least 1");
  if (!(ema_beta > 0 && ema_beta <= 1)) fail("ema_beta must lie in (0, 1]");
}

json to_json(const AMConfig& c) {
  return {{"alpha", {c.alpha1, c.alpha2, c.alpha3, c.alpha4}},
          {"tau", c.tau},
          {"delta_th", c.delta_th},
          {"lambda", c.lambda},
          {"c_max", c.c_max},
          {"t_idle", c.t_idle},
          {"epsilon", c.epsilon},
          {"elite_count", c.elite_count},
          {"ema_beta", c.ema_beta}};
}

AMConfig am_config_from_json(const json& doc, AMConfig c) {
  if (doc.contains("alpha")) {
    auto a = doc.at("alpha").get<std::vector<double>>();
    if (a.size() != 4) throw Error(ErrorCode::kConfigInvalid, "am.alpha needs 4 weights");
    c.alpha1 = a[0];
    c.alpha2 = a[1];
    c.alpha3 = a[2];
    c.alpha4 = a[3];
  }
  c.tau = doc.value("tau", c.tau);
  c.delta_th = doc.value("delta_th", c.delta_th);
  c.lambda = doc.value("lambda", c.lambda);
  c.c_max = doc.value("c_max", c.c_max);
  c.t_idle = doc.value("t_idle", c.t_idle);
  c.epsilon = doc.value("epsilon", c.epsilon);
  c.elite_count = doc.value("elite_count", c.elite_count);
  c.ema_beta = doc.value("ema_beta", c.ema_beta);
  c.validate();
  return c;
}

namespace {

std::vector<std::string> tokenize(std::string_view src) {
  std::vector<std::string> toks;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      while (i < n && src[i] != '\n') ++i;
    } else if (c == '"' || c == '\'') {
      const bool triple = i + 2 < n && src[i + 1] == c && src[i + 2] == c;
      std::size_t j = i + (triple ? 3 : 1);
      while (j < n) {
        if (src[j] == '\\') {
          j += 2;
          continue;
        }
        if (triple ? (j + 2 < n && src[j] == c && src[j + 1] == c && src[j + 2] == c) : src[j] == c) break;
        if (!triple && src[j] == '\n') break;
        ++j;
      }
      i = std::min(n, j + (triple ? 3 : 1));
      toks.emplace_back("<str>");
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < n && (text::is_identifier_char(src[i]) || src[i] == '.')) ++i;
      toks.emplace_back("<num>");
    } else if (text::is_identifier_char(c)) {
      std::string id;
      while (i < n && text::is_identifier_char(src[i])) {
        id += static_cast<char>(std::tolower(static_cast<unsigned char>(src[i])));
        ++i;
      }
      toks.push_back(std::move(id));
    } else {
      toks.emplace_back(1, c);
      ++i;
    }
  }
  for (std::size_t k = 0; k + 1 < toks.size(); ++k) {
    if (toks[k] == "def") {
      const std::string own = toks[k + 1];
      for (auto& t : toks) {
        if (t == own) t = "<fn>";
      }
      break;
    }
  }
  return toks;
}

std::map<std::string, int> shingles(std::string_view src) {
  auto toks = tokenize(src);
  std::map<std::string, int> out;
  if (toks.empty()) return out;
  if (toks.size() < 3) {
    std::string s;
    for (const auto& t : toks) s += t + '\x1f';
    ++out[s];
    return out;
  }
  for (std::size_t i = 0; i + 2 < toks.size(); ++i) ++out[toks[i] + '\x1f' + toks[i + 1] + '\x1f' + toks[i + 2]];
  return out;
}

std::string defined_name(std::string_view source) {
  for (const auto& line : text::split_lines(source)) {
    auto t = text::trim(line);
    if (!text::starts_with(t, "def ")) continue;
    auto rest = text::trim(t.substr(4));
    std::size_t k = 0;
    while (k < rest.size() && text::is_identifier_char(rest[k])) ++k;
    return std::string(rest.substr(0, k));
  }
  return {};
}

std::string signature_of(std::string_view source) {
  for (const auto& line : text::split_lines(source)) {
    auto t = text::trim(line);
    if (!text::starts_with(t, "def ")) continue;
    auto open = t.find('(');
    auto colon = t.rfind(':');
    if (open == std::string_view::npos || colon == std::string_view::npos || colon < open) return "()";
    return std::string(text::trim(t.substr(open, colon - open)));
  }
  return "()";
}

bool is_reserved_slot_name(std::string_view name) {
  if (!text::starts_with(name, "func_")) return false;
  auto digits = name.substr(5);
  return !digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

double similarity(std::string_view f, std::string_view g) {
  auto a = shingles(f);
  auto b = shingles(g);
  if (a.empty() && b.empty()) return 1.0;
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      uni += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      uni += ib->second;
      ++ib;
    } else {
      inter += std::min(ia->second, ib->second);
      uni += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<Features> normalize(const std::vector<Features>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyBatch, "nothing to normalize");
  std::vector<Features> out(rows.size());
  auto column = [&](double Features::*field) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& r : rows) {
      lo = std::min(lo, r.*field);
      hi = std::max(hi, r.*field);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out[i].*field = hi == lo ? 0.5 : (rows[i].*field - lo) / (hi - lo);
    }
  };
  column(&Features::fit);
  column(&Features::nov);
  column(&Features::use);
  column(&Features::age);
  return out;
}

double composite(const Features& x, const AMConfig& cfg) {
  return cfg.alpha1 * x.fit + cfg.alpha2 * x.nov + cfg.alpha3 * x.use - cfg.alpha4 * x.age;
}

double utility(const MemoryEntry& e, const AMConfig& cfg) {
  return cfg.lambda * e.s_last + (1.0 - cfg.lambda) * e.ema_improvement;
}

Naming parse_naming(std::string_view completion) {
  std::string code = text::first_fenced_block(completion).value_or(std::string(text::trim(completion)));
  Naming n;
  n.name = defined_name(code);
  if (!text::is_identifier(n.name)) throw Error(ErrorCode::kNamingFailure, "no `def name(...)` line in the reply");
  n.signature = signature_of(code);
  for (std::string_view q : {"\"\"\"", "'''"}) {
    auto open = code.find(q);
    if (open == std::string::npos) continue;
    auto close = code.find(q, open + 3);
    auto body = code.substr(open + 3, close == std::string::npos ? std::string::npos : close - open - 3);
    auto lines = text::split_lines(body);
    int common = std::numeric_limits<int>::max();
    for (const auto& l : lines) {
      if (!text::is_blank(l)) common = std::min(common, text::indentation(l));
    }
    std::string doc;
    for (const auto& l : lines) {
      std::string_view v = l;
      std::size_t cut = 0;
      int ind = 0;
      while (cut < v.size() && ind < common && (v[cut] == ' ' || v[cut] == '\t')) {
        ind += v[cut] == '\t' ? 4 : 1;
        ++cut;
      }
      doc += std::string(text::trim_right(v.substr(cut))) + "\n";
    }
    n.purpose = std::string(text::trim(doc));
    break;
  }
  if (n.purpose.empty()) throw Error(ErrorCode::kNamingFailure, "reply has no docstring");
  return n;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kInsert: return "insert";
    case EventKind::kReplace: return "replace";
    case EventKind::kDiscard: return "discard";
    case EventKind::kEvict: return "evict";
    case EventKind::kPrune: return "prune";
    case EventKind::kNamingFailure: return "naming_failure";
  }
  return "insert";
}

json to_json(const UpdateEvent& e) {
  return {{"kind", to_string(e.kind)}, {"candidate", e.candidate}, {"target", e.target}, {"target_seq", e.target_seq},
          {"sim", e.sim},           {"s_f", e.s_f},             {"s_g", e.s_g},       {"u_star", e.u_star}};
}

AdaptiveMemory::AdaptiveMemory(AMConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const MemoryEntry* AdaptiveMemory::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::vector<Features> AdaptiveMemory::stored_features(int gen) const {
  std::vector<Features> out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    double best = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < entries_.size(); ++j) {
      if (i == j) continue;
      best = std::max(best, similarity(entries_[i].source, entries_[j].source));
      any = true;
    }
    out.push_back({entries_[i].fitness, any ? 1.0 - best : 1.0, static_cast<double>(entries_[i].usage_count),
                   static_cast<double>(gen - entries_[i].inserted_gen)});
  }
  return out;
}

std::vector<UpdateEvent> AdaptiveMemory::update(const std::vector<Candidate>& batch, int gen, const Namer& namer) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "adaptive memory update needs at least one candidate");
  std::vector<UpdateEvent> events;

  // raw features are taken against the store as it was when the update began
  std::map<std::int64_t, Features> live;
  {
    auto stored = stored_features(gen);
    for (std::size_t i = 0; i < entries_.size(); ++i) live[entries_[i].seq] = stored[i];
  }
  std::vector<Features> raw;
  for (const auto& f : batch) {
    double best = 0.0;
    for (const auto& g : entries_) best = std::max(best, similarity(f.source, g.source));
    raw.push_back({f.fitness, entries_.empty() ? 1.0 : 1.0 - best, static_cast<double>(f.usage), 0.0});
  }
  const auto batch_norm = normalize(raw);

  std::vector<std::int64_t> pending;
  std::map<std::int64_t, std::string> pending_purpose;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& f = batch[i];
    MemoryEntry* g_star = nullptr;
    double sim = -1.0;
    for (auto& g : entries_) {
      double s = similarity(f.source, g.source);
      if (s > sim) {
        sim = s;
        g_star = &g;
      }
    }
    UpdateEvent ev;
    ev.candidate = static_cast<int>(i);
    if (g_star && sim > cfg_.tau) {
      auto rows = raw;
      rows.push_back(live.at(g_star->seq));
      auto norm = normalize(rows);
      const double s_f = composite(norm[i], cfg_);
      const double s_g = composite(norm.back(), cfg_);
      ev.sim = sim;
      ev.s_f = s_f;
      ev.s_g = s_g;
      ev.target = g_star->name;
      ev.target_seq = g_star->seq;
      if (s_f - s_g > cfg_.delta_th) {
        const std::string old = defined_name(f.source);
        g_star->source = old.empty() ? f.source : text::replace_identifier(f.source, old, g_star->name);
        g_star->fitness = f.fitness;
        g_star->s_last = s_f;
        g_star->last_used_gen = gen;
        live[g_star->seq] = {raw[i].fit, raw[i].nov, static_cast<double>(g_star->usage_count),
                             static_cast<double>(gen - g_star->inserted_gen)};
        ev.kind = EventKind::kReplace;
      } else {
        g_star->s_last = s_g;
        ev.kind = EventKind::kDiscard;
      }
    } else {
      MemoryEntry e;
      e.seq = next_seq_++;
      e.name = fmt::format("__pending_{}", e.seq);
      e.source = f.source;
      e.fitness = f.fitness;
      e.inserted_gen = gen;
      e.last_used_gen = gen;
      e.s_last = composite(batch_norm[i], cfg_);
      e.signature = signature_of(f.source);
      live[e.seq] = raw[i];
      pending.push_back(e.seq);
      pending_purpose[e.seq] = f.purpose;
      ev.kind = EventKind::kInsert;
      ev.sim = std::max(sim, 0.0);
      ev.s_f = e.s_last;
      ev.target_seq = e.seq;
      entries_.push_back(std::move(e));
    }
    events.push_back(ev);
  }

  while (entries_.size() > static_cast<std::size_t>(cfg_.c_max)) {
    auto victim = std::min_element(entries_.begin(), entries_.end(), [&](const auto& a, const auto& b) {
      const double ua = utility(a, cfg_);
      const double ub = utility(b, cfg_);
      return ua != ub ? ua < ub : a.seq < b.seq;
    });
    UpdateEvent ev;
    ev.kind = EventKind::kEvict;
    ev.target = victim->name;
    ev.target_seq = victim->seq;
    ev.u_star = utility(*victim, cfg_);
    events.push_back(ev);
    entries_.erase(victim);
  }

  for (auto it = entries_.begin(); it != entries_.end();) {
    const double u = utility(*it, cfg_);
    if (gen - it->last_used_gen >= cfg_.t_idle && u < cfg_.epsilon) {
      UpdateEvent ev;
      ev.kind = EventKind::kPrune;
      ev.target = it->name;
      ev.target_seq = it->seq;
      ev.u_star = u;
      events.push_back(ev);
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }

  for (auto& e : entries_) {
    if (std::find(pending.begin(), pending.end(), e.seq) == pending.end()) continue;
    std::optional<Naming> naming;
    std::string why;
    if (namer) {
      try {
        naming = namer(e.source);
        if (!text::is_identifier(naming->name)) {
          why = "invalid identifier";
        } else if (is_reserved_slot_name(naming->name)) {
          why = "name collides with a function slot";
        } else if (find(naming->name)) {
          why = "name already taken";
        }
      } catch (const std::exception& ex) {
        why = ex.what();
      }
    } else {
      why = "no namer configured";
    }
    const std::string old = defined_name(e.source);
    if (naming && why.empty()) {
      e.name = naming->name;
      e.purpose = naming->purpose;
      e.signature = naming->signature.empty() ? e.signature : naming->signature;
    } else {
      e.name = fmt::format("am_func_{}_{}", gen, e.seq);
      e.purpose = pending_purpose[e.seq].empty() ? "unspecified" : pending_purpose[e.seq];
      e.fallback_name = true;
      UpdateEvent ev;
      ev.kind = EventKind::kNamingFailure;
      ev.target = e.name;
      ev.target_seq = e.seq;
      events.push_back(ev);
    }
    if (!old.empty()) e.source = text::replace_identifier(e.source, old, e.name);
    for (auto& ev : events) {
      if (ev.target_seq == e.seq && ev.kind == EventKind::kInsert) ev.target = e.name;
    }
  }
  return events;
}

void AdaptiveMemory::record_usage(std::string_view program, int gen) {
  for (auto& e : entries_) {
    if (text::calls_identifier(program, e.name)) {
      ++e.usage_count;
      e.last_used_gen = std::max(e.last_used_gen, gen);
    }
  }
}

void AdaptiveMemory::record_improvement(std::string_view best_program, double improvement) {
  if (!(improvement > 0)) return;
  std::vector<MemoryEntry*> used;
  for (auto& e : entries_) {
    if (text::calls_identifier(best_program, e.name)) used.push_back(&e);
  }
  if (used.empty()) return;
  const double share = improvement / static_cast<double>(used.size());
  for (auto* e : used) e->ema_improvement = cfg_.ema_beta * share + (1.0 - cfg_.ema_beta) * e->ema_improvement;
}

std::vector<prompts::ListingEntry> AdaptiveMemory::listing() const {
  std::vector<prompts::ListingEntry> out;
  for (const auto& e : entries_) out.push_back({e.name, e.signature, e.purpose});
  return out;
}

core::KnowledgeView AdaptiveMemory::view() const {
  core::KnowledgeView v;
  for (const auto& e : entries_) v.functions.push_back({e.name, e.source, core::ImplOrigin::kAdaptiveMemory});
  return v;
}

json AdaptiveMemory::to_json(int generation) const {
  json entries = json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"name", e.name},
                       {"purpose", e.purpose},
                       {"signature", e.signature},
                       {"source", e.source},
                       {"fitness", e.fitness},
                       {"usage_count", e.usage_count},
                       {"inserted_gen", e.inserted_gen},
                       {"last_used_gen", e.last_used_gen},
                       {"ema_improvement", e.ema_improvement},
                       {"s_last", e.s_last},
                       {"seq", e.seq},
                       {"fallback_name", e.fallback_name}});
  }
  return {{"entries", entries}, {"config", memory::to_json(cfg_)}, {"generation", generation}, {"next_seq", next_seq_}};
}

AdaptiveMemory AdaptiveMemory::from_json(const json& doc) {
  AdaptiveMemory am(am_config_from_json(doc.at("config")));
  for (const auto& j : doc.at("entries")) {
    MemoryEntry e;
    e.name = j.at("name").get<std::string>();
    e.purpose = j.at("purpose").get<std::string>();
    e.signature = j.value("signature", std::string("()"));
    e.source = j.at("source").get<std::string>();
    e.fitness = j.at("fitness").get<double>();
    e.usage_count = j.at("usage_count").get<std::int64_t>();
    e.inserted_gen = j.at("inserted_gen").get<int>();
    e.last_used_gen = j.at("last_used_gen").get<int>();
    e.ema_improvement = j.at("ema_improvement").get<double>();
    e.s_last = j.at("s_last").get<double>();
    e.seq = j.at("seq").get<std::int64_t>();
    e.fallback_name = j.value("fallback_name", false);
    am.entries_.push_back(std::move(e));
  }
  am.next_seq_ = doc.value("next_seq", static_cast<std::int64_t>(am.entries_.size()));
  return am;
}

std::vector<Candidate> candidates_from_elites(const std::vector<core::HeuristicIndividual>& population,
                                              int elite_count) {
  std::vector<const core::HeuristicIndividual*> ranked;
  for (const auto& m : population) {
    if (m.evaluated()) ranked.push_back(&m);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](auto* a, auto* b) { return core::ranks_ahead(*a, *b); });
  if (ranked.size() > static_cast<std::size_t>(elite_count)) ranked.resize(static_cast<std::size_t>(elite_count));
  std::vector<Candidate> out;
  std::map<std::string, std::size_t> index;
  for (const auto* elite : ranked) {
    std::set<std::string> seen_here;
    for (const auto& [slot_id, impl] : elite->impls) {
      std::string src(text::trim(impl.source));
      if (src.empty() || !seen_here.insert(src).second) continue;
      auto it = index.find(src);
      if (it != index.end()) {
        ++out[it->second].usage;
        continue;
      }
      Candidate c;
      c.source = src;
      c.fitness = *elite->quality;
      c.usage = 1;
      if (const auto* slot = elite->structure.find_slot(slot_id)) c.purpose = slot->purpose;
      index[src] = out.size();
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace heurgen::memory
