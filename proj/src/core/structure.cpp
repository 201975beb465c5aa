#include "heurgen/core/structure.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"

namespace heurgen::core {

namespace {

const std::regex& def_pattern() {
  static const std::regex re(R"(^([ \t]*)def[ \t]+([A-Za-z_][A-Za-z0-9_]*)[ \t]*\()");
  return re;
}

const std::regex& slot_name_pattern() {
  static const std::regex re(R"(^func_([0-9]+)$)");
  return re;
}

const std::regex& assignment_pattern() {
  static const std::regex re(R"(^([ \t]*)([A-Za-z_][A-Za-z0-9_]*)[ \t]*=[ \t]*([^#]*?)[ \t]*(#.*)?$)");
  return re;
}

const std::regex& decimal_pattern() {
  static const std::regex re(R"(^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?$)");
  return re;
}

const std::regex& purpose_pattern() {
  static const std::regex re(R"(#[ \t]*Purpose[ \t]*:[ \t]*(.*)$)");
  return re;
}

/// Line span of one function definition.
struct DefSpan {
  std::string name;
  int slot_id = -1;      // k for func_k, else -1
  std::size_t begin = 0;  // first header line
  std::size_t body = 0;   // first body line
  std::size_t end = 0;    // one past the last non-blank body line
  int indent = 0;
  std::string signature;
  std::string inline_body;  // statement following the header colon, if any
};

std::string strip_comment(std::string_view line) {
  // good enough for headers: '#' inside string literals is not expected there
  auto pos = line.find('#');
  return std::string(pos == std::string_view::npos ? line : line.substr(0, pos));
}

std::vector<DefSpan> find_defs(const std::vector<std::string>& lines) {
  std::vector<DefSpan> defs;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::smatch m;
    if (!std::regex_search(lines[i], m, def_pattern())) continue;
    DefSpan span;
    span.name = m[2].str();
    span.begin = i;
    span.indent = text::indentation(lines[i]);
    std::smatch sm;
    if (std::regex_match(span.name, sm, slot_name_pattern())) span.slot_id = std::stoi(sm[1].str());

    // Walk the header until parentheses balance and the colon appears.
    std::string header;
    int depth = 0;
    bool opened = false;
    std::size_t j = i;
    std::size_t colon_line = i;
    std::size_t colon_pos = std::string::npos;
    for (; j < lines.size(); ++j) {
      const std::string code = strip_comment(lines[j]);
      std::size_t start = (j == i) ? static_cast<std::size_t>(m.position(0) + m.length(0) - 1) : 0;
      for (std::size_t k = start; k < code.size(); ++k) {
        char c = code[k];
        if (c == '(' || c == '[' || c == '{') {
          ++depth;
          opened = true;
        } else if (c == ')' || c == ']' || c == '}') {
          --depth;
        } else if (c == ':' && depth == 0 && opened) {
          colon_line = j;
          colon_pos = k;
          break;
        }
      }
      if (colon_pos != std::string::npos) break;
    }
    if (colon_pos == std::string::npos) continue;  // malformed header; not a definition we can use

    for (std::size_t k = i; k <= colon_line; ++k) {
      std::string code = strip_comment(lines[k]);
      if (k == colon_line) code = code.substr(0, colon_pos);
      if (k == i) code = code.substr(static_cast<std::size_t>(m.position(0) + m.length(0) - 1));
      if (!header.empty()) header += ' ';
      header += std::string(text::trim(code));
    }
    span.signature = header;
    std::string rest(text::trim(strip_comment(lines[colon_line]).substr(colon_pos + 1)));
    span.inline_body = rest;
    span.body = colon_line + 1;

    std::size_t last = colon_line;
    std::size_t k = colon_line + 1;
    for (; k < lines.size(); ++k) {
      if (text::is_blank(lines[k])) continue;
      if (text::indentation(lines[k]) <= span.indent) break;
      last = k;
    }
    span.end = last + 1;
    if (!rest.empty()) span.end = std::max(span.end, colon_line + 1);
    defs.push_back(span);
    i = colon_line;  // nested definitions are still visited on later lines
  }
  return defs;
}

bool is_stub_body(const std::vector<std::string>& lines, const DefSpan& span) {
  if (!span.inline_body.empty() && span.inline_body != "pass" && span.inline_body != "...") return false;
  bool in_doc = false;
  std::string quote;
  for (std::size_t k = span.body; k < span.end; ++k) {
    auto t = text::trim(lines[k]);
    if (t.empty()) continue;
    if (in_doc) {
      if (text::contains(t, quote)) in_doc = false;
      continue;
    }
    if (t.front() == '#') continue;
    if (t == "pass" || t == "...") continue;
    if (text::starts_with(t, "\"\"\"") || text::starts_with(t, "'''")) {
      quote = std::string(t.substr(0, 3));
      auto rest = t.substr(3);
      if (!text::contains(rest, quote)) in_doc = true;
      continue;
    }
    return false;
  }
  return true;
}

std::string find_purpose(const std::vector<std::string>& lines, const DefSpan& span) {
  for (std::size_t k = span.begin; k < span.end; ++k) {
    std::smatch m;
    if (!std::regex_search(lines[k], m, purpose_pattern())) continue;
    std::string purpose(text::trim(m[1].str()));
    // continuation comment lines extend an empty or wrapped purpose
    for (std::size_t n = k + 1; n < span.end; ++n) {
      auto t = text::trim(lines[n]);
      if (t.empty() || t.front() != '#') break;
      if (!purpose.empty()) break;
      purpose = std::string(text::trim(t.substr(1)));
    }
    return purpose;
  }
  return {};
}

bool is_hyper_marker(std::string_view line) {
  std::string squashed;
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      squashed += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return squashed == "#hyperparameter#";
}

std::pair<std::size_t, std::size_t> find_markers(const std::vector<std::string>& lines) {
  std::vector<std::size_t> found;
  for (std::size_t i = 0; i < lines.size() && found.size() < 2; ++i) {
    if (is_hyper_marker(lines[i])) found.push_back(i);
  }
  if (found.size() < 2) {
    throw Error(ErrorCode::kMissingHyperMarkers,
                fmt::format("expected two '{}' marker lines, found {}", kHyperMarker, found.size()));
  }
  return {found[0], found[1]};
}

bool has_type_comment(std::string_view comment, const char* type) {
  const std::regex re(fmt::format(R"(^#[ \t]*{}\b)", type));
  return std::regex_search(comment.begin(), comment.end(), re);
}

bool integer_shaped(const std::string& literal) {
  static const std::regex re(R"(^[+-]?[0-9]+$)");
  return std::regex_match(literal, re);
}

std::vector<HyperParam> parse_hyper_block(const std::vector<std::string>& lines,
                                          std::vector<std::string>& warnings) {
  auto [open, close] = find_markers(lines);
  std::vector<HyperParam> block;
  for (std::size_t i = open + 1; i < close; ++i) {
    auto t = text::trim(lines[i]);
    if (t.empty() || t.front() == '#') continue;
    std::smatch m;
    if (!std::regex_match(lines[i], m, assignment_pattern())) {
      warnings.push_back(fmt::format("ignoring non-assignment line in hyperparameter block: {}", t));
      continue;
    }
    HyperParam p;
    p.name = m[2].str();
    p.literal = m[3].str();
    if (!std::regex_match(p.literal, decimal_pattern())) {
      throw Error(ErrorCode::kInvalidHyperValue,
                  fmt::format("{} = {} is not a decimal literal", p.name, p.literal));
    }
    p.value = std::stod(p.literal);
    const std::string comment = m[4].matched ? m[4].str() : std::string();
    p.is_integer = has_type_comment(comment, "int") || (integer_shaped(p.literal) && !has_type_comment(comment, "float"));
    if (std::any_of(block.begin(), block.end(), [&](const HyperParam& q) { return q.name == p.name; })) {
      throw Error(ErrorCode::kParseError, fmt::format("hyperparameter {} assigned twice", p.name));
    }
    block.push_back(std::move(p));
  }
  return block;
}

struct Analysis {
  std::vector<std::string> lines;  // after renumbering
  std::vector<DefSpan> defs;       // all definitions
  StructureCode structure;         // source still holds realized bodies
  std::vector<std::string> warnings;
};

std::string renumber_slots(std::string_view program, const std::map<int, int>& mapping) {
  std::string out(program);
  for (const auto& [from, to] : mapping) {
    out = text::replace_identifier(out, fmt::format("func_{}", from), fmt::format("__heurgen_slot_{}", to));
  }
  for (const auto& [from, to] : mapping) {
    out = text::replace_identifier(out, fmt::format("__heurgen_slot_{}", to), fmt::format("func_{}", to));
  }
  return out;
}

std::string unfence(std::string_view program) {
  if (auto block = text::first_fenced_block(program)) return *block;
  return std::string(program);
}

Analysis analyze(std::string_view program, const ParseOptions& options) {
  Analysis a;
  std::string source = unfence(program);
  a.lines = text::split_lines(source);
  a.defs = find_defs(a.lines);

  std::vector<int> ids;
  for (const auto& d : a.defs) {
    if (d.slot_id < 0) continue;
    if (std::find(ids.begin(), ids.end(), d.slot_id) != ids.end()) {
      throw Error(ErrorCode::kParseError, fmt::format("func_{} is defined more than once", d.slot_id));
    }
    ids.push_back(d.slot_id);
  }
  if (ids.empty()) {
    throw Error(ErrorCode::kMissingSlots, "structure defines no func_<id> placeholder");
  }
  if (static_cast<int>(ids.size()) > options.max_func_num) {
    throw Error(ErrorCode::kTooManySlots,
                fmt::format("{} placeholders exceed max_func_num = {}", ids.size(), options.max_func_num));
  }
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  bool contiguous = true;
  for (std::size_t i = 0; i < sorted.size(); ++i) contiguous = contiguous && sorted[i] == static_cast<int>(i) + 1;
  if (!contiguous) {
    std::map<int, int> mapping;
    for (std::size_t i = 0; i < sorted.size(); ++i) mapping[sorted[i]] = static_cast<int>(i) + 1;
    // calls to undefined ids must be caught before renumbering hides them
    static const std::regex call_re(R"(\bfunc_([0-9]+)[ \t]*\()");
    for (auto it = std::sregex_iterator(source.begin(), source.end(), call_re); it != std::sregex_iterator(); ++it) {
      int id = std::stoi((*it)[1].str());
      if (!mapping.count(id)) {
        throw Error(ErrorCode::kParseError, fmt::format("func_{} is called but never defined", id));
      }
    }
    std::string renumbered_ids;
    for (const auto& [from, to] : mapping) {
      if (from != to) renumbered_ids += fmt::format(" func_{}->func_{}", from, to);
    }
    a.warnings.push_back("slot ids were not contiguous from 1; renumbered:" + renumbered_ids);
    source = renumber_slots(source, mapping);
    a.lines = text::split_lines(source);
    a.defs = find_defs(a.lines);
  }

  static const std::regex call_re(R"(\bfunc_([0-9]+)[ \t]*\()");
  std::set<int> defined;
  for (const auto& d : a.defs) {
    if (d.slot_id > 0) defined.insert(d.slot_id);
  }
  for (auto it = std::sregex_iterator(source.begin(), source.end(), call_re); it != std::sregex_iterator(); ++it) {
    int id = std::stoi((*it)[1].str());
    if (!defined.count(id)) {
      throw Error(ErrorCode::kParseError, fmt::format("func_{} is called but never defined", id));
    }
  }

  a.structure.hyper_block = parse_hyper_block(a.lines, a.warnings);
  const HyperParam* max_time = nullptr;
  for (const auto& p : a.structure.hyper_block) {
    if (p.name == kMaxTimeName) max_time = &p;
  }
  if (max_time == nullptr) {
    throw Error(ErrorCode::kMissingMaxTime, "hyperparameter block has no MAX_TIME");
  }
  a.structure.max_time_s = max_time->value;

  for (const auto& d : a.defs) {
    if (d.slot_id < 0) continue;
    FunctionSlot slot;
    slot.id = d.slot_id;
    slot.signature = d.signature;
    slot.purpose = find_purpose(a.lines, d);
    if (slot.purpose.empty()) {
      a.warnings.push_back(fmt::format("func_{} has no '# Purpose:' line", d.slot_id));
      slot.purpose = "unspecified";
    }
    a.structure.slots.push_back(std::move(slot));
  }
  std::sort(a.structure.slots.begin(), a.structure.slots.end(),
            [](const FunctionSlot& x, const FunctionSlot& y) { return x.id < y.id; });
  return a;
}

std::vector<std::string> stub_lines(const DefSpan& span, const std::vector<std::string>& lines,
                                    const std::string& purpose) {
  std::vector<std::string> out(lines.begin() + static_cast<std::ptrdiff_t>(span.begin),
                               lines.begin() + static_cast<std::ptrdiff_t>(span.body));
  if (!span.inline_body.empty()) {
    // drop the inline statement after the header colon
    auto& last = out.back();
    auto colon = strip_comment(last).rfind(':');
    if (colon != std::string::npos) last = last.substr(0, colon + 1);
  }
  std::string pad(static_cast<std::size_t>(span.indent) + 4, ' ');
  out.push_back(pad + "# Purpose: " + purpose);
  out.push_back(pad + "pass");
  return out;
}

std::string stubbed_source(const std::vector<std::string>& lines, const std::vector<DefSpan>& defs) {
  std::vector<std::string> out;
  std::size_t cursor = 0;
  for (const auto& d : defs) {
    if (d.slot_id < 0 || d.begin < cursor) continue;
    out.insert(out.end(), lines.begin() + static_cast<std::ptrdiff_t>(cursor),
               lines.begin() + static_cast<std::ptrdiff_t>(d.begin));
    std::string purpose = find_purpose(lines, d);
    if (purpose.empty()) purpose = "unspecified";
    auto stub = stub_lines(d, lines, purpose);
    out.insert(out.end(), stub.begin(), stub.end());
    cursor = d.end;
  }
  out.insert(out.end(), lines.begin() + static_cast<std::ptrdiff_t>(cursor), lines.end());
  return text::join_lines(out);
}

std::string span_text(const std::vector<std::string>& lines, const DefSpan& d) {
  std::vector<std::string> out(lines.begin() + static_cast<std::ptrdiff_t>(d.begin),
                               lines.begin() + static_cast<std::ptrdiff_t>(d.end));
  return text::join_lines(out);
}

/// Re-indents a definition so that its `def` line starts at `indent`.
std::vector<std::string> reindent(std::string_view definition, int indent) {
  auto lines = text::split_lines(definition);
  while (!lines.empty() && text::is_blank(lines.front())) lines.erase(lines.begin());
  while (!lines.empty() && text::is_blank(lines.back())) lines.pop_back();
  if (lines.empty()) return lines;
  int current = text::indentation(lines.front());
  if (current == indent) return lines;
  for (auto& line : lines) {
    if (text::is_blank(line)) {
      line.clear();
      continue;
    }
    int width = text::indentation(line);
    std::size_t strip = 0;
    while (strip < line.size() && (line[strip] == ' ' || line[strip] == '\t')) ++strip;
    int target = std::max(0, width - current + indent);
    line = std::string(static_cast<std::size_t>(target), ' ') + line.substr(strip);
  }
  return lines;
}

}  // namespace

const HyperParam* StructureCode::find_hyper(std::string_view name) const {
  for (const auto& p : hyper_block) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const FunctionSlot* StructureCode::find_slot(int id) const {
  for (const auto& s : slots) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

ParsedStructure parse_structure(std::string_view program, const ParseOptions& options) {
  Analysis a = analyze(program, options);
  a.structure.source = stubbed_source(a.lines, a.defs);
  return {std::move(a.structure), std::move(a.warnings)};
}

Decomposed decompose(std::string_view program, const ParseOptions& options) {
  Analysis a = analyze(program, options);
  Decomposed out;
  for (const auto& d : a.defs) {
    if (d.slot_id < 0 || is_stub_body(a.lines, d)) continue;
    FunctionImpl impl;
    impl.slot_id = d.slot_id;
    impl.source = span_text(a.lines, d);
    out.impls.emplace(d.slot_id, std::move(impl));
  }
  a.structure.source = stubbed_source(a.lines, a.defs);
  out.structure = std::move(a.structure);
  out.warnings = std::move(a.warnings);
  return out;
}

std::map<int, std::string> extract_slot_definitions(std::string_view program) {
  auto lines = text::split_lines(unfence(program));
  std::map<int, std::string> out;
  for (const auto& d : find_defs(lines)) {
    if (d.slot_id > 0 && !out.count(d.slot_id)) out.emplace(d.slot_id, span_text(lines, d));
  }
  return out;
}

std::string strip_to_stubs(std::string_view program) {
  auto lines = text::split_lines(program);
  return stubbed_source(lines, find_defs(lines));
}

std::string hyper_literal(double value, bool is_integer) {
  if (is_integer) return fmt::format("{}", static_cast<long long>(std::llround(value)));
  std::string s = fmt::format("{}", value);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string rewrite_hyper_block(std::string_view source, const std::vector<HyperParam>& hyper_block) {
  auto lines = text::split_lines(source);
  auto [open, close] = find_markers(lines);
  for (std::size_t i = open + 1; i < close; ++i) {
    std::smatch m;
    if (!std::regex_match(lines[i], m, assignment_pattern())) continue;
    auto it = std::find_if(hyper_block.begin(), hyper_block.end(),
                           [&](const HyperParam& p) { return p.name == m[2].str(); });
    if (it == hyper_block.end() || it->literal == m[3].str()) continue;
    std::string rebuilt = lines[i].substr(0, static_cast<std::size_t>(m.position(3))) + it->literal +
                          lines[i].substr(static_cast<std::size_t>(m.position(3) + m.length(3)));
    lines[i] = std::move(rebuilt);
  }
  return text::join_lines(lines);
}

StructureCode with_hyper_values(const StructureCode& structure, const std::vector<HyperParam>& replacements) {
  StructureCode out = structure;
  for (const auto& r : replacements) {
    for (auto& p : out.hyper_block) {
      if (p.name != r.name) continue;
      p.value = r.value;
      p.literal = r.literal.empty() ? hyper_literal(r.value, p.is_integer) : r.literal;
      if (p.name == kMaxTimeName) out.max_time_s = p.value;
    }
  }
  out.source = rewrite_hyper_block(out.source, out.hyper_block);
  return out;
}

std::string realize(const StructureCode& structure, const std::map<int, FunctionImpl>& impls) {
  auto lines = text::split_lines(structure.source);
  auto defs = find_defs(lines);
  std::vector<std::string> out;
  std::size_t cursor = 0;
  for (const auto& d : defs) {
    if (d.slot_id < 0 || d.begin < cursor) continue;
    auto it = impls.find(d.slot_id);
    if (it == impls.end()) continue;
    out.insert(out.end(), lines.begin() + static_cast<std::ptrdiff_t>(cursor),
               lines.begin() + static_cast<std::ptrdiff_t>(d.begin));
    auto body = reindent(it->second.source, d.indent);
    out.insert(out.end(), body.begin(), body.end());
    cursor = d.end;
  }
  out.insert(out.end(), lines.begin() + static_cast<std::ptrdiff_t>(cursor), lines.end());
  return text::join_lines(out);
}

const KnowledgeFunction* KnowledgeView::find(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

const std::regex& knowledge_from_import() {
  static const std::regex re(
      R"(^[ \t]*from[ \t]+(heubase|am|adaptive_memory|memory)(\.[A-Za-z0-9_.]+)?[ \t]+import[ \t]+(.+)$)");
  return re;
}

const std::regex& knowledge_plain_import() {
  static const std::regex re(R"(^[ \t]*import[ \t]+(heubase|am|adaptive_memory|memory)(\.[A-Za-z0-9_.]+)?.*$)");
  return re;
}

struct ImportedName {
  std::string name;
  std::string alias;
};

std::vector<ImportedName> parse_import_list(std::string list) {
  list = strip_comment(list);
  std::vector<ImportedName> names;
  std::string cleaned;
  for (char c : list) {
    if (c != '(' && c != ')' && c != '\\') cleaned += c;
  }
  std::size_t start = 0;
  while (start <= cleaned.size()) {
    auto comma = cleaned.find(',', start);
    std::string item(text::trim(std::string_view(cleaned).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (!item.empty()) {
      ImportedName n;
      auto as = item.find(" as ");
      if (as != std::string::npos) {
        n.name = std::string(text::trim(std::string_view(item).substr(0, as)));
        n.alias = std::string(text::trim(std::string_view(item).substr(as + 4)));
      } else {
        n.name = item;
      }
      names.push_back(std::move(n));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return names;
}

struct ImportScan {
  std::string program;  // import lines removed
  std::vector<ImportedName> imported;
};

ImportScan scan_knowledge_imports(std::string_view program) {
  ImportScan scan;
  std::vector<std::string> kept;
  for (auto& line : text::split_lines(program)) {
    std::smatch m;
    if (std::regex_match(line, m, knowledge_from_import())) {
      auto names = parse_import_list(m[3].str());
      scan.imported.insert(scan.imported.end(), names.begin(), names.end());
      continue;
    }
    if (std::regex_match(line, knowledge_plain_import())) continue;
    kept.push_back(line);
  }
  scan.program = text::join_lines(kept);
  return scan;
}

bool defines_function(std::string_view program, std::string_view name) {
  auto lines = text::split_lines(program);
  for (const auto& d : find_defs(lines)) {
    if (d.name == name) return true;
  }
  return false;
}

std::vector<std::string> closure(std::string_view program, const std::vector<std::string>& seeds,
                                 const KnowledgeView& knowledge) {
  std::set<std::string> picked(seeds.begin(), seeds.end());
  for (const auto& f : knowledge.functions) {
    if (text::calls_identifier(program, f.name)) picked.insert(f.name);
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& f : knowledge.functions) {
      if (!picked.count(f.name)) continue;
      for (const auto& g : knowledge.functions) {
        if (picked.count(g.name) || g.name == f.name) continue;
        if (text::calls_identifier(f.body, g.name)) {
          picked.insert(g.name);
          grew = true;
        }
      }
    }
  }
  std::vector<std::string> ordered;
  for (const auto& f : knowledge.functions) {
    if (picked.count(f.name)) ordered.push_back(f.name);
  }
  return ordered;
}

}  // namespace

std::vector<std::string> referenced_knowledge(std::string_view program, const KnowledgeView& knowledge) {
  auto scan = scan_knowledge_imports(program);
  std::vector<std::string> seeds;
  for (const auto& n : scan.imported) {
    if (knowledge.find(n.name)) seeds.push_back(n.name);
  }
  return closure(scan.program, seeds, knowledge);
}

std::string assemble(const HeuristicIndividual& individual, const KnowledgeView& knowledge) {
  for (const auto& slot : individual.structure.slots) {
    if (!individual.impls.count(slot.id)) {
      throw Error(ErrorCode::kAssemblyError, fmt::format("func_{} has no implementation", slot.id));
    }
  }
  std::string realized = realize(individual.structure, individual.impls);
  auto scan = scan_knowledge_imports(realized);

  std::vector<std::string> seeds;
  std::string aliases;
  for (const auto& n : scan.imported) {
    if (!knowledge.find(n.name)) {
      throw Error(ErrorCode::kUnresolvedKnowledgeReference,
                  fmt::format("'{}' is imported but not present in the heuristic database", n.name));
    }
    seeds.push_back(n.name);
    if (!n.alias.empty() && n.alias != n.name) aliases += fmt::format("{} = {}\n", n.alias, n.name);
  }
  auto names = closure(scan.program, seeds, knowledge);
  for (const auto& name : names) {
    if (defines_function(scan.program, name)) {
      throw Error(ErrorCode::kDuplicateDefinition,
                  fmt::format("'{}' is preloaded from the heuristic database and must not be redefined", name));
    }
  }

  std::string out;
  for (const auto& name : names) {
    const auto* f = knowledge.find(name);
    out += fmt::format("# knowledge: {}\n", name);
    out += std::string(text::trim_right(f->body));
    out += "\n\n\n";
  }
  if (!aliases.empty()) out += aliases + "\n";
  out += scan.program;
  return out;
}

}  // namespace heurgen::core
