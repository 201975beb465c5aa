#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heurgen::text {

std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool contains(std::string_view s, std::string_view needle);

/// Number of leading spaces, tabs counted as 4.
int indentation(std::string_view line);
bool is_blank(std::string_view line);

bool is_identifier_char(char c);
bool is_identifier(std::string_view s);

/// True when `name` occurs in `source` as a whole identifier immediately
/// followed (after optional spaces) by an opening parenthesis.
bool calls_identifier(std::string_view source, std::string_view name);

/// Replaces whole-identifier occurrences of `from` with `to`.
std::string replace_identifier(std::string_view source, std::string_view from, std::string_view to);

/// Content of the first ``` fenced block, if any.
std::optional<std::string> first_fenced_block(std::string_view text);

/// Last `max_bytes` of `s`, cut on a UTF-8 boundary.
std::string tail(std::string_view s, std::size_t max_bytes);

}  // namespace heurgen::text
