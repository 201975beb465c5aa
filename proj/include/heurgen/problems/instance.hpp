#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace heurgen::problems {

enum class ProblemKind { kTsp, kBpp, kMis, kCvrp };
enum class Sense { kMinimize, kMaximize };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view s);
Sense sense_of(ProblemKind kind);

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

struct TspInstance {
  std::vector<Point> coords;
  friend bool operator==(const TspInstance&, const TspInstance&) = default;
};

/// Bin capacity is fixed at 1.
struct BppInstance {
  std::vector<double> items;
  friend bool operator==(const BppInstance&, const BppInstance&) = default;
};

struct MisInstance {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  friend bool operator==(const MisInstance&, const MisInstance&) = default;
};

struct CvrpInstance {
  Point depot;
  std::vector<Point> coords;
  std::vector<double> demands;
  double capacity = 0.0;
  int nb_vehicles = 0;
  friend bool operator==(const CvrpInstance&, const CvrpInstance&) = default;
};

using ProblemInstance = std::variant<TspInstance, BppInstance, MisInstance, CvrpInstance>;

ProblemKind kind_of(const ProblemInstance& instance);

struct TspSolution {
  std::vector<int> tour;
};
struct BppSolution {
  std::vector<std::vector<int>> bins;
};
struct MisSolution {
  std::vector<int> select;  // 0/1 per node
};
/// Client indices into CvrpInstance::coords; the depot is implicit.
struct CvrpSolution {
  std::vector<std::vector<int>> routes;
};

using Solution = std::variant<TspSolution, BppSolution, MisSolution, CvrpSolution>;

/// Instance JSON as sent to candidate programs.
nlohmann::json to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(ProblemKind kind, const nlohmann::json& doc);

nlohmann::json to_json(const Solution& solution);
/// Parses a candidate's solution payload; throws schema_mismatch.
Solution solution_from_json(ProblemKind kind, const nlohmann::json& payload);

}  // namespace heurgen::problems
