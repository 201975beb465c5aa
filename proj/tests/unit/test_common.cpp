#include "doctest.h"

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"

using namespace heurgen;

TEST_CASE("error messages carry the snake-case class") {
  Error e(ErrorCode::kBudgetExhausted, "tokens spent");
  CHECK(std::string(e.what()) == "budget_exhausted: tokens spent");
  CHECK(e.code() == ErrorCode::kBudgetExhausted);
  CHECK(to_string(ErrorCode::kMissingLog) == "missing_log");
}

TEST_CASE("calls_identifier ignores definitions and attribute calls") {
  CHECK(text::calls_identifier("x = arw(g)", "arw"));
  CHECK(text::calls_identifier("x = arw (g)", "arw"));
  CHECK_FALSE(text::calls_identifier("def arw(g):\n    pass", "arw"));
  CHECK_FALSE(text::calls_identifier("x = lib.arw(g)", "arw"));
  CHECK_FALSE(text::calls_identifier("x = arwx(g)", "arw"));
  CHECK(text::calls_identifier("def f():\n    return arw(1)", "arw"));
}

TEST_CASE("fenced block extraction and trimming") {
  CHECK(text::first_fenced_block("```python\nX=1\n```").value() == "X=1");
  CHECK(text::first_fenced_block("a\n```\nA\n```\n```\nB\n```").value() == "A");
  CHECK_FALSE(text::first_fenced_block("no fence").has_value());
  CHECK(text::trim("  a b \n") == "a b");
  CHECK(text::indentation("\t  x") == 6);
  CHECK(text::is_identifier("func_1"));
  CHECK_FALSE(text::is_identifier("1func"));
  CHECK(text::replace_identifier("a = func_1(func_10)", "func_1", "g") == "a = g(func_10)");
}

TEST_CASE("tail cuts on a UTF-8 boundary") {
  std::string s = "ab\xc3\xa9";  // "abé"
  auto t = text::tail(s, 1);
  CHECK(t.empty());
  CHECK(text::tail(s, 2) == "\xc3\xa9");
}
