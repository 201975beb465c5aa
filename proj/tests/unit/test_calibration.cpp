#include "doctest.h"

#include <cmath>

#include "heurgen/calibration/cmaes.hpp"
#include "heurgen/core/structure.hpp"

using namespace heurgen;
using namespace heurgen::calibration;
using Eigen::VectorXd;

namespace {

const char* kStructure = R"(#Hyperparameter#
MAX_TIME = 30
ALPHA = 0.9
K = 1  # int
#Hyperparameter#

def func_1(x):
    # Purpose: step
    pass

def heuristic(x):
    return func_1(x)
)";

core::StructureCode structure() { return core::parse_structure(kStructure).structure; }

double planted(const core::StructureCode& s) {
  const double a = s.find_hyper("ALPHA")->value;
  const double k = s.find_hyper("K")->value;
  return -(a - 0.3) * (a - 0.3) - 0.1 * (k - 3) * (k - 3);
}

}  // namespace

TEST_CASE("range parsing filters MAX_TIME and unknown names") {
  auto s = structure();
  auto one = parse_ranges("```python\npms_dict = {\"ALPHA\": (0.1, 1.0)}\n```", s);
  REQUIRE(one.ranges.size() == 1);
  CHECK(one.ranges[0].name == "ALPHA");
  CHECK(one.ranges[0].low == 0.1);
  CHECK(one.ranges[0].high == 1.0);
  CHECK_FALSE(one.ranges[0].is_integer);

  auto filtered = parse_ranges("pms_dict = {'MAX_TIME': (1, 100), 'K': (0, 5), 'BETA': (0, 1)}", s);
  REQUIRE(filtered.ranges.size() == 1);
  CHECK(filtered.ranges[0].name == "K");
  CHECK(filtered.ranges[0].is_integer);
  CHECK_FALSE(filtered.warnings.empty());
}

TEST_CASE("default population size") {
  CHECK(default_lambda(1) == 4);
  CHECK(default_lambda(5) == 8);
  CHECK(default_lambda(10) == 10);
}

TEST_CASE("sphere converges") {
  CmaOptions o;
  o.sigma0 = 0.5;
  o.max_evals = 5000;
  o.seed = 1;
  auto r = cmaes_minimize([](const VectorXd& x) { return x.squaredNorm(); }, VectorXd::Ones(5), o);
  CHECK(r.best_f < 1e-6);
  CHECK(r.evals <= 5000);
}

TEST_CASE("bounded one-dimensional optimum") {
  CmaOptions o;
  o.sigma0 = 1.0;
  o.max_evals = 1000;
  o.lower = VectorXd::Constant(1, 0.0);
  o.upper = VectorXd::Constant(1, 5.0);
  auto r = cmaes_minimize([](const VectorXd& x) { return (x[0] - 2) * (x[0] - 2); }, VectorXd::Constant(1, 4.5), o);
  CHECK(std::abs(r.best_x[0] - 2.0) < 1e-3);

  auto edge = cmaes_minimize([](const VectorXd& x) { return (x[0] - 9) * (x[0] - 9); }, VectorXd::Constant(1, 1.0), o);
  CHECK(edge.best_x[0] <= 5.0);
  CHECK(edge.best_x[0] > 4.99);
}

TEST_CASE("rosenbrock") {
  CmaOptions o;
  o.sigma0 = 0.5;
  o.max_evals = 10000;
  o.seed = 2;
  auto rosen = [](const VectorXd& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); };
  auto r = cmaes_minimize(rosen, VectorXd::Zero(2), o);
  CHECK(r.best_f < 1e-2);
}

TEST_CASE("non-finite objective values rank last") {
  CmaOptions o;
  o.max_evals = 300;
  auto r = cmaes_minimize(
      [](const VectorXd& x) { return x[0] < 0 ? std::nan("") : (x[0] - 1) * (x[0] - 1); }, VectorXd::Constant(1, 2.0), o);
  CHECK(std::isfinite(r.best_f));
}

TEST_CASE("decode rounds integers and clamps") {
  std::vector<RangeSpec> ranges = {{"ALPHA", 0.0, 2.0, false}, {"K", 0, 5, true}};
  VectorXd u(2);
  u << 0.25, 0.57;
  auto p = decode(u, ranges);
  CHECK(p[0].value == 0.5);
  CHECK(p[1].value == 3.0);
  CHECK(p[1].literal == "3");
  u << 1.5, -0.2;
  p = decode(u, ranges);
  CHECK(p[0].value == 2.0);
  CHECK(p[1].value == 0.0);
}

TEST_CASE("calibration finds a planted optimum") {
  auto s = structure();
  std::vector<RangeSpec> ranges = {{"ALPHA", 0.0, 1.0, false}, {"K", 0, 5, true}};
  auto fn = [](const core::StructureCode& v) -> std::optional<double> { return planted(v); };
  CalibrationOptions o;
  o.max_evals = 300;
  o.seed = 3;
  auto r = calibrate(s, planted(s), ranges, fn, fn, o);
  REQUIRE(r.improved);
  CHECK(std::abs(r.structure.find_hyper("ALPHA")->value - 0.3) < 0.02);
  CHECK(r.structure.find_hyper("K")->value == 3.0);
  CHECK(r.structure.find_hyper("MAX_TIME")->literal == "30");
  CHECK(r.post_quality > r.pre_quality);
  CHECK(r.structure.source.find("K = 3  # int") != std::string::npos);
}

TEST_CASE("calibration leaves the structure alone without strict gain") {
  auto s = structure();
  std::vector<RangeSpec> ranges = {{"ALPHA", 0.0, 1.0, false}};
  auto flat = [](const core::StructureCode&) -> std::optional<double> { return 1.0; };
  auto r = calibrate(s, 1.0, ranges, flat, flat, {});
  CHECK_FALSE(r.improved);
  CHECK(r.structure.source == s.source);

  auto none = calibrate(s, 0.0, {{"MAX_TIME", 1, 100, true}}, flat, flat, {});
  CHECK_FALSE(none.improved);
  CHECK(none.evals_used == 0);

  auto search = [](const core::StructureCode& v) -> std::optional<double> { return planted(v); };
  auto worse = [](const core::StructureCode&) -> std::optional<double> { return -100.0; };
  auto rejected = calibrate(s, planted(s), {{"ALPHA", 0.0, 1.0, false}}, search, worse, {});
  CHECK_FALSE(rejected.improved);
  CHECK(rejected.structure.source == s.source);

  auto failing = [](const core::StructureCode&) -> std::optional<double> { return std::nullopt; };
  CHECK_FALSE(calibrate(s, -5.0, ranges, failing, failing, {}).improved);
}
