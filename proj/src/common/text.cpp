#include "heurgen/common/text.hpp"

#include <cctype>

namespace heurgen::text {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += lines[i];
    out += '\n';
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return trim_right(s);
}

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool contains(std::string_view s, std::string_view needle) {
  return s.find(needle) != std::string_view::npos;
}

int indentation(std::string_view line) {
  int width = 0;
  for (char c : line) {
    if (c == ' ') {
      ++width;
    } else if (c == '\t') {
      width += 4;
    } else {
      break;
    }
  }
  return width;
}

bool is_blank(std::string_view line) { return trim(line).empty(); }

bool is_identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  for (char c : s) {
    if (!is_identifier_char(c)) return false;
  }
  return true;
}

namespace {

bool whole_word_at(std::string_view source, std::size_t pos, std::size_t len) {
  if (pos > 0 && is_identifier_char(source[pos - 1])) return false;
  if (pos + len < source.size() && is_identifier_char(source[pos + len])) return false;
  return true;
}

}  // namespace

bool calls_identifier(std::string_view source, std::string_view name) {
  if (name.empty()) return false;
  for (auto pos = source.find(name); pos != std::string_view::npos;
       pos = source.find(name, pos + 1)) {
    if (!whole_word_at(source, pos, name.size())) continue;
    // attribute access such as `obj.name(` is not a call of the free function
    if (pos > 0 && source[pos - 1] == '.') continue;
    auto before = trim_right(source.substr(0, pos));
    if (before.size() >= 3 && before.substr(before.size() - 3) == "def" &&
        (before.size() == 3 || !is_identifier_char(before[before.size() - 4])))
      continue;
    auto after = pos + name.size();
    while (after < source.size() && (source[after] == ' ' || source[after] == '\t')) ++after;
    if (after < source.size() && source[after] == '(') return true;
  }
  return false;
}

std::string replace_identifier(std::string_view source, std::string_view from, std::string_view to) {
  std::string out;
  std::size_t cursor = 0;
  for (auto pos = source.find(from); pos != std::string_view::npos; pos = source.find(from, pos + 1)) {
    if (!whole_word_at(source, pos, from.size())) continue;
    out.append(source.substr(cursor, pos - cursor));
    out.append(to);
    cursor = pos + from.size();
  }
  out.append(source.substr(cursor));
  return out;
}

std::optional<std::string> first_fenced_block(std::string_view text) {
  auto open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto body_start = text.find('\n', open);
  if (body_start == std::string_view::npos) return std::nullopt;
  ++body_start;
  auto close = text.find("```", body_start);
  std::string_view body = close == std::string_view::npos ? text.substr(body_start)
                                                          : text.substr(body_start, close - body_start);
  return std::string(trim_right(body));
}

std::string tail(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return std::string(s);
  auto start = s.size() - max_bytes;
  while (start < s.size() && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) ++start;
  return std::string(s.substr(start));
}

}  // namespace heurgen::text
