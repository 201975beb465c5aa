#include "doctest.h"

#include <algorithm>
#include <chrono>

#include "heurgen/problems/binding.hpp"
#include "heurgen/problems/suite.hpp"
#include "heurgen/sandbox/runner.hpp"

using namespace heurgen;
using namespace heurgen::sandbox;
using problems::ProblemKind;

namespace {

std::string with_driver(const std::string& body, ProblemKind kind) { return body + problems::driver_suffix(kind); }

const std::string kIdentityTour = with_driver("def heuristic(coords):\n    return list(range(len(coords)))\n", ProblemKind::kTsp);

SandboxConfig fast() {
  SandboxConfig c;
  c.grace_s = 0.5;
  return c;
}

}  // namespace

TEST_CASE("identity tour is accepted and scored by the validator") {
  problems::TspInstance sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  auto r = run(kIdentityTour, sq, 5, fast());
  CHECK(r.status == Status::kOk);
  REQUIRE(r.objective.has_value());
  CHECK(*r.objective == 4.0);
}

TEST_CASE("failure classes") {
  problems::TspInstance sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  CHECK(run("def heuristic(coords:\n    return 1\n", sq, 5, fast()).status == Status::kCompileError);
  auto rt = run(with_driver("def heuristic(coords):\n    return 1 / 0\n", ProblemKind::kTsp), sq, 5, fast());
  CHECK(rt.status == Status::kRuntimeError);
  CHECK(rt.stderr_tail.find("ZeroDivisionError") != std::string::npos);
  CHECK(rt.error_message().find("ZeroDivisionError") != std::string::npos);
  CHECK(run("print('hello')\n", sq, 5, fast()).status == Status::kProtocolError);
  auto bad = run(with_driver("def heuristic(coords):\n    return [0, 0, 1, 2]\n", ProblemKind::kTsp), sq, 5, fast());
  CHECK(bad.status == Status::kConstraintViolation);
}

TEST_CASE("progress output before the answer is tolerated") {
  problems::TspInstance sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  auto prog = with_driver("def heuristic(coords):\n    print('working', flush=True)\n    print('{\"solution\": 3}')\n    return [0, 1, 2, 3]\n",
                          ProblemKind::kTsp);
  CHECK(run(prog, sq, 5, fast()).status == Status::kOk);
}

TEST_CASE("adjacent MIS selection names the edge") {
  problems::MisInstance g{3, {{0, 1}, {1, 2}}};
  auto r = run(with_driver("def heuristic(num_nodes, edges):\n    return [1, 1, 0]\n", ProblemKind::kMis), g, 5, fast());
  CHECK(r.status == Status::kConstraintViolation);
  CHECK(r.details.find("edge (0, 1)") != std::string::npos);
  CHECK(r.error_message().find("edge (0, 1)") != std::string::npos);
}

TEST_CASE("sleeping candidate is killed") {
  problems::TspInstance sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  auto t0 = std::chrono::steady_clock::now();
  auto r = run("import time\nwhile True:\n    time.sleep(1)\n", sq, 0.5, fast());
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(r.status == Status::kTimeout);
  CHECK(r.wall_ms >= 1000);
  CHECK(elapsed < 0.5 + 0.5 + 1.0);
}

TEST_CASE("batches") {
  std::vector<problems::ProblemInstance> insts;
  for (std::uint64_t s = 0; s < 3; ++s) insts.push_back(problems::generate(ProblemKind::kTsp, 5, s));
  auto serial = run_batch(kIdentityTour, insts, 5, fast());
  REQUIRE(serial.size() == 3);
  for (const auto& r : serial) CHECK(r.ok());

  auto parallel_cfg = fast();
  parallel_cfg.workers = 3;
  auto parallel = run_batch(kIdentityTour, insts, 5, parallel_cfg);
  REQUIRE(parallel.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(*parallel[i].objective == *serial[i].objective);

  std::vector<problems::ProblemInstance> mixed = {insts[0], problems::TspInstance{{{0, 0}, {1, 1}}}, insts[2]};
  auto prog = with_driver("def heuristic(coords):\n    assert len(coords) > 2\n    return list(range(len(coords)))\n",
                          ProblemKind::kTsp);
  CHECK(run_batch(prog, mixed, 5, fast(), true).size() == 2);
  CHECK(run_batch(prog, mixed, 5, fast(), false).size() == 3);
}

TEST_CASE("environment is filtered") {
  setenv("HEURGEN_SECRET_TEST", "x", 1);
  problems::TspInstance sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  auto prog = with_driver("import os\ndef heuristic(coords):\n    assert 'HEURGEN_SECRET_TEST' not in os.environ\n    return [0, 1, 2, 3]\n",
                          ProblemKind::kTsp);
  CHECK(run(prog, sq, 5, fast()).ok());
}
