#include "heurgen/problems/instance.hpp"

#include <cmath>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"

namespace heurgen::problems {

using nlohmann::json;

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kTsp: return "tsp";
    case ProblemKind::kBpp: return "bpp";
    case ProblemKind::kMis: return "mis";
    case ProblemKind::kCvrp: return "cvrp";
  }
  return "tsp";
}

ProblemKind problem_kind_from_string(std::string_view s) {
  if (s == "tsp") return ProblemKind::kTsp;
  if (s == "bpp") return ProblemKind::kBpp;
  if (s == "mis") return ProblemKind::kMis;
  if (s == "cvrp") return ProblemKind::kCvrp;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown problem kind '{}'", s));
}

Sense sense_of(ProblemKind kind) {
  return kind == ProblemKind::kMis ? Sense::kMaximize : Sense::kMinimize;
}

double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

ProblemKind kind_of(const ProblemInstance& instance) {
  return static_cast<ProblemKind>(instance.index());
}

namespace {

json point_json(const Point& p) { return json::array({p.x, p.y}); }

Point point_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::kSchemaMismatch, "point must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Point> points_from(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kSchemaMismatch, "coords must be an array");
  std::vector<Point> out;
  out.reserve(j.size());
  for (const auto& p : j) out.push_back(point_from(p));
  return out;
}

int as_index(const json& j) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_number_float()) {
    double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 1e9) return static_cast<int>(v);
  }
  throw Error(ErrorCode::kSchemaMismatch, fmt::format("expected an integer index, got {}", j.dump()));
}

std::vector<int> index_list(const json& j, std::string_view what) {
  if (!j.is_array()) throw Error(ErrorCode::kSchemaMismatch, fmt::format("{} must be an array", what));
  std::vector<int> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_index(v));
  return out;
}

std::vector<std::vector<int>> nested_index_list(const json& j, std::string_view what) {
  if (!j.is_array()) throw Error(ErrorCode::kSchemaMismatch, fmt::format("{} must be an array", what));
  std::vector<std::vector<int>> out;
  for (const auto& inner : j) out.push_back(index_list(inner, what));
  return out;
}

const json& field(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw Error(ErrorCode::kSchemaMismatch, fmt::format("missing field '{}'", name));
  }
  return doc.at(name);
}

}  // namespace

json to_json(const ProblemInstance& instance) {
  return std::visit(
      [](const auto& inst) -> json {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, TspInstance>) {
          json coords = json::array();
          for (const auto& p : inst.coords) coords.push_back(point_json(p));
          return {{"coords", coords}};
        } else if constexpr (std::is_same_v<T, BppInstance>) {
          return {{"items", inst.items}};
        } else if constexpr (std::is_same_v<T, MisInstance>) {
          json edges = json::array();
          for (const auto& [u, v] : inst.edges) edges.push_back({u, v});
          return {{"num_nodes", inst.num_nodes}, {"edges", edges}};
        } else {
          json coords = json::array();
          for (const auto& p : inst.coords) coords.push_back(point_json(p));
          return {{"depot", point_json(inst.depot)},
                  {"coords", coords},
                  {"demands", inst.demands},
                  {"capacity", inst.capacity},
                  {"nb_vehicles", inst.nb_vehicles}};
        }
      },
      instance);
}

ProblemInstance instance_from_json(ProblemKind kind, const json& doc) {
  switch (kind) {
    case ProblemKind::kTsp: return TspInstance{points_from(field(doc, "coords"))};
    case ProblemKind::kBpp: return BppInstance{field(doc, "items").get<std::vector<double>>()};
    case ProblemKind::kMis: {
      MisInstance m;
      m.num_nodes = field(doc, "num_nodes").get<int>();
      for (const auto& e : field(doc, "edges")) m.edges.emplace_back(as_index(e.at(0)), as_index(e.at(1)));
      return m;
    }
    case ProblemKind::kCvrp: {
      CvrpInstance c;
      c.depot = point_from(field(doc, "depot"));
      c.coords = points_from(field(doc, "coords"));
      c.demands = field(doc, "demands").get<std::vector<double>>();
      c.capacity = field(doc, "capacity").get<double>();
      c.nb_vehicles = field(doc, "nb_vehicles").get<int>();
      return c;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown problem kind");
}

json to_json(const Solution& solution) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TspSolution>) {
          return {{"tour", s.tour}};
        } else if constexpr (std::is_same_v<T, BppSolution>) {
          return {{"bins", s.bins}};
        } else if constexpr (std::is_same_v<T, MisSolution>) {
          return {{"select", s.select}};
        } else {
          return {{"routes", s.routes}};
        }
      },
      solution);
}

Solution solution_from_json(ProblemKind kind, const json& payload) {
  switch (kind) {
    case ProblemKind::kTsp: {
      TspSolution s{index_list(field(payload, "tour"), "tour")};
      // a closed tour repeating its start node is accepted
      if (s.tour.size() > 1 && s.tour.front() == s.tour.back()) s.tour.pop_back();
      return s;
    }
    case ProblemKind::kBpp: return BppSolution{nested_index_list(field(payload, "bins"), "bins")};
    case ProblemKind::kMis: {
      const auto& sel = field(payload, "select");
      if (!sel.is_array()) throw Error(ErrorCode::kSchemaMismatch, "select must be an array");
      MisSolution s;
      for (const auto& v : sel) {
        if (v.is_boolean()) {
          s.select.push_back(v.get<bool>() ? 1 : 0);
        } else {
          s.select.push_back(as_index(v));
        }
      }
      return s;
    }
    case ProblemKind::kCvrp: return CvrpSolution{nested_index_list(field(payload, "routes"), "routes")};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown problem kind");
}

}  // namespace heurgen::problems
