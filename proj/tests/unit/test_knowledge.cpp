#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "heurgen/common/error.hpp"
#include "heurgen/knowledge/store.hpp"

using namespace heurgen;
using namespace heurgen::knowledge;
namespace fs = std::filesystem;

namespace {

const std::string kData = HEURGEN_TEST_DATA;

const prompts::PromptKit& kit() {
  static const prompts::PromptKit k = prompts::PromptKit::load(HEURGEN_PROMPTS_DIR);
  return k;
}

HeuBaseEntry entry(std::string name, std::vector<std::string> tags = {"tsp"}) {
  return {name, "(x)", "Does a thing.", "def " + name + "(x):\n    return x\n", std::move(tags),
          Provenance::kPreConstructed};
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::kIoError;
}

}  // namespace

TEST_CASE("manifest loads in order") {
  auto base = HeuBase::load_manifest(kData + "/heubase/manifest.json");
  REQUIRE(base.entries().size() == 3);
  CHECK(base.entries()[0].name == "nearest_neighbor_tour");
  CHECK(base.entries()[2].name == "min_degree_greedy");
  CHECK(base.find("two_opt")->body.find("def two_opt(coords, tour):") != std::string::npos);
  CHECK(base.find("missing") == nullptr);
  CHECK(base.lint().empty());
  CHECK(base.view({"mis"}).functions.size() == 1);
}

TEST_CASE("entry validation") {
  CHECK(code_of([] { HeuBase({entry("arw"), entry("arw")}); }) == ErrorCode::kDuplicateName);
  auto blank = entry("blank");
  blank.docstring = "  \n";
  CHECK(code_of([&] { HeuBase({blank}); }) == ErrorCode::kMalformedEntry);
  auto loose = entry("loose");
  loose.body += "print('side effect')\n";
  CHECK(code_of([&] { HeuBase({loose}); }) == ErrorCode::kMalformedEntry);
  auto misnamed = entry("named");
  misnamed.body = "def other(x):\n    return x\n";
  CHECK(code_of([&] { HeuBase({misnamed}); }) == ErrorCode::kMalformedEntry);
  CHECK(code_of([] { HeuBase::load_manifest("/nonexistent/manifest.json"); }) == ErrorCode::kLoadError);
}

TEST_CASE("nested entries are reported by lint") {
  auto outer = entry("outer");
  outer.body = "def outer(x):\n    return inner(x)\n";
  CHECK(HeuBase({outer, entry("inner")}).lint().size() == 1);
}

TEST_CASE("listing follows tags and manifest order") {
  auto base = HeuBase::load_manifest(kData + "/heubase/manifest.json");
  CHECK(render_heubase_prompt(kit(), base, {"bpp"}).empty());
  auto tsp = render_heubase_prompt(kit(), base, {"tsp"});
  CHECK(tsp.find("Do not reimplement these functions") != std::string::npos);
  CHECK(tsp.find("def nearest_neighbor_tour(coords, start):") < tsp.find("def two_opt(coords, tour):"));
  CHECK(tsp.find("min_degree_greedy") == std::string::npos);
  CHECK(tsp.find("Out: improved tour") != std::string::npos);

  auto combined = render_heubase_prompt(kit(), base, {"tsp"}, {{"mem_helper_0", "(tour)", "Remembered step."}});
  CHECK(combined.find("two_opt") < combined.find("mem_helper_0"));
  auto am_only = render_heubase_prompt(kit(), base, {"bpp"}, {{"mem_helper_0", "(tour)", "Remembered step."}});
  CHECK(am_only.find("heuristic database") != std::string::npos);
}

TEST_CASE("knobase selection by tag") {
  auto docs = load_knobase(kData + "/knobase");
  REQUIRE(docs.size() == 2);
  CHECK(knobase_text(docs, {"tsp"}).find("2-opt") != std::string::npos);
  CHECK(knobase_text(docs, {"mis"}).find("Low-degree") != std::string::npos);
  CHECK(knobase_text(docs, {"bpp"}).empty());
  CHECK(code_of([] { load_knobase("/nonexistent/knobase"); }) == ErrorCode::kLoadError);
}

TEST_CASE("selection counters") {
  HeuBase base({entry("kaffpa"), entry("arw")});
  SelectionStats stats(base);
  stats.record("x = kaffpa(graph)\n");
  CHECK(stats.count("kaffpa") == 1);
  CHECK(stats.count("arw") == 0);
  stats.record("x = 1\n# arw is not called here\n");
  CHECK(stats.count("arw") == 0);
  CHECK(stats.observed() == 2);
  CHECK(stats.frequency("kaffpa") == 0.5);

  SelectionStats copy(base);
  copy.restore(stats.to_json());
  CHECK(copy.to_json() == stats.to_json());
}

TEST_CASE("planted call rates are measured exactly") {
  HeuBase base({entry("kaffpa"), entry("arw"), entry("dtc")});
  SelectionStats stats(base);
  const double planted[] = {0.42, 0.16, 0.8};
  const char* names[] = {"kaffpa", "arw", "dtc"};
  std::int64_t expected[3] = {0, 0, 0};
  for (int i = 0; i < 50; ++i) {
    std::string program = "def heuristic(g):\n";
    for (int k = 0; k < 3; ++k) {
      if (i < static_cast<int>(planted[k] * 50)) {
        program += std::string("    ") + names[k] + "(g)\n";
        ++expected[k];
      }
    }
    program += "    return g\n";
    stats.record(program);
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(stats.count(names[k]) == expected[k]);
    CHECK(std::abs(stats.frequency(names[k]) - planted[k]) <= 0.02);
  }
}
