#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "heurgen/common/error.hpp"
#include "heurgen/problems/binding.hpp"
#include "heurgen/problems/suite.hpp"

using namespace heurgen;
using namespace heurgen::problems;
using nlohmann::json;

namespace {

TspInstance unit_square() { return TspInstance{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}; }

MisInstance triangle() { return MisInstance{3, {{0, 1}, {1, 2}, {0, 2}}}; }

}  // namespace

TEST_CASE("generation is seed-deterministic and well-formed") {
  CHECK(generate(ProblemKind::kTsp, 4, 0) == generate(ProblemKind::kTsp, 4, 0));
  CHECK_FALSE(generate(ProblemKind::kTsp, 4, 0) == generate(ProblemKind::kTsp, 4, 1));
  const auto bpp = std::get<BppInstance>(generate(ProblemKind::kBpp, 100, 7));
  CHECK(bpp.items.size() == 100);
  CHECK(std::all_of(bpp.items.begin(), bpp.items.end(), [](double x) { return x > 0.0 && x <= 1.0; }));
  const auto cvrp = std::get<CvrpInstance>(generate(ProblemKind::kCvrp, 20, 3));
  CHECK(cvrp.coords.size() == 20);
  CHECK(cvrp.capacity > 0);
  double total = 0;
  for (double d : cvrp.demands) total += d;
  CHECK(total <= cvrp.capacity * cvrp.nb_vehicles);
  CHECK(instance_id(ProblemKind::kTsp, 20, 3) == "tsp-20-3");
}

TEST_CASE("RB graphs stay inside the 200-300 band") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = std::get<MisInstance>(generate(ProblemKind::kMis, 250, seed));
    CHECK(g.num_nodes >= 200);
    CHECK(g.num_nodes <= 300);
  }
}

TEST_CASE("unsupported sizes") {
  CHECK_THROWS_AS(generate(ProblemKind::kTsp, 2, 0), Error);
  CHECK_THROWS_AS(generate(ProblemKind::kTsp, 0, 0), Error);
}

TEST_CASE("validation rules") {
  CHECK(validate(unit_square(), TspSolution{{0, 1, 2, 3}}).ok);
  CHECK_FALSE(validate(unit_square(), TspSolution{{0, 1, 1, 3}}).ok);
  CHECK_FALSE(validate(unit_square(), TspSolution{{0, 1, 2}}).ok);

  auto mis = validate(triangle(), MisSolution{{1, 1, 0}});
  CHECK_FALSE(mis.ok);
  CHECK(mis.details.find("edge (0, 1)") != std::string::npos);

  CHECK(validate(BppInstance{{0.5, 0.5, 0.5}}, BppSolution{{{0, 1}, {2}}}).ok);
  CHECK_FALSE(validate(BppInstance{{0.5, 0.6}}, BppSolution{{{0, 1}}}).ok);
  CHECK_FALSE(validate(BppInstance{{0.5, 0.6}}, BppSolution{{{0}}}).ok);

  CvrpInstance c{{0, 0}, {{1, 0}, {0, 1}}, {1.0, 1.1}, 2.0, 2};
  auto over = validate(c, CvrpSolution{{{0, 1}}});
  CHECK_FALSE(over.ok);
  CHECK(over.details.find("route 0") != std::string::npos);
  CHECK(validate(c, CvrpSolution{{{0}, {1}}}).ok);
  CHECK_FALSE(validate(CvrpInstance{{0, 0}, {{1, 0}, {0, 1}}, {1.0, 1.0}, 2.0, 1}, CvrpSolution{{{0}, {1}}}).ok);
}

TEST_CASE("payload schema problems become violations") {
  auto v = validate_payload(unit_square(), json{{"tour", "abc"}});
  CHECK_FALSE(v.ok);
  CHECK(v.details.find("schema_mismatch") != std::string::npos);
  CHECK(validate_payload(unit_square(), json{{"tour", {3, 2, 1, 0}}}).ok);
}

TEST_CASE("objective known values") {
  CHECK(objective(unit_square(), TspSolution{{0, 1, 2, 3}}) == 4.0);
  CHECK(objective(triangle(), MisSolution{{1, 0, 0}}) == 1.0);
  CHECK(objective(BppInstance{{0.5, 0.5, 0.5}}, BppSolution{{{0, 1}, {2}}}) == 2.0);
  CvrpInstance c{{0, 0}, {{3, 4}}, {1.0}, 2.0, 1};
  CHECK(objective(c, CvrpSolution{{{0}}}) == 10.0);
  CHECK_THROWS_AS(objective(triangle(), MisSolution{{1, 1, 0}}), Error);
}

TEST_CASE("gap sign law") {
  CHECK(gap(15.57, 15.56, Sense::kMinimize) == doctest::Approx(0.0643).epsilon(1e-3));
  CHECK(gap(43.03, 43.00, Sense::kMaximize) == doctest::Approx(-0.0698).epsilon(1e-3));
  CHECK(gap(5.0, 5.0, Sense::kMinimize) == 0.0);
  CHECK(gap(5.0, 5.0, Sense::kMaximize) == 0.0);
  CHECK(gap(9.0, 10.0, Sense::kMinimize) < 0.0);
  CHECK(gap(11.0, 10.0, Sense::kMaximize) < 0.0);
  CHECK_THROWS_AS(gap(1.0, 0.0, Sense::kMinimize), Error);
}

TEST_CASE("exhaustive references") {
  CHECK(brute_force_reference(unit_square()).value == 4.0);
  MisInstance path{5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}};
  auto ref = brute_force_reference(path);
  CHECK(ref.value == 3.0);
  CHECK(validate(path, ref.solution).ok);
  CHECK(brute_force_reference(BppInstance{{0.5, 0.5, 0.5}}).value == 2.0);
  try {
    brute_force_reference(generate(ProblemKind::kTsp, oracle_limit(ProblemKind::kTsp) + 1, 0));
    FAIL("expected size_exceeds_oracle");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSizeExceedsOracle);
  }
}

TEST_CASE("constructive references are feasible and never beat the optimum") {
  for (auto kind : {ProblemKind::kTsp, ProblemKind::kBpp, ProblemKind::kMis, ProblemKind::kCvrp}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const int n = kind == ProblemKind::kMis ? 12 : 7;
      auto inst = generate(kind, n, seed);
      if (kind == ProblemKind::kMis && std::get<MisInstance>(inst).num_nodes > oracle_limit(kind)) continue;
      auto c = constructive_reference(inst);
      CHECK(validate(inst, c.solution).ok);
      auto opt = brute_force_reference(inst);
      if (sense_of(kind) == Sense::kMinimize) CHECK(c.value >= opt.value - 1e-9);
      else CHECK(c.value <= opt.value + 1e-9);
    }
  }
}

TEST_CASE("sidecar references") {
  const auto path = std::filesystem::temp_directory_path() / "heurgen_refs_test.json";
  {
    std::ofstream out(path);
    out << R"({"tsp-20-1": 3.75})";
  }
  CHECK(file_reference(path, "tsp-20-1") == 3.75);
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIoError;
  };
  CHECK(code_of([&] { file_reference(path, "tsp-20-2"); }) == ErrorCode::kMissingReferenceFile);
  CHECK(code_of([&] { file_reference(path.string() + ".nope", "x"); }) == ErrorCode::kMissingReferenceFile);
  std::filesystem::remove(path);
}

TEST_CASE("instance JSON round trip and bindings") {
  for (auto kind : {ProblemKind::kTsp, ProblemKind::kBpp, ProblemKind::kMis, ProblemKind::kCvrp}) {
    auto inst = generate(kind, kind == ProblemKind::kMis ? 30 : 12, 5);
    CHECK(instance_from_json(kind, to_json(inst)) == inst);
    const auto& b = binding_for(kind);
    CHECK(b.baseline.find("def heuristic(") != std::string::npos);
    CHECK(driver_suffix(kind).find(b.solution_key) != std::string::npos);
    CHECK(problem_kind_from_string(to_string(kind)) == kind);
  }
}
