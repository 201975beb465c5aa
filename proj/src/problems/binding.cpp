#include "heurgen/problems/binding.hpp"

#include <array>

#include <fmt/format.h>

namespace heurgen::problems {

namespace {

ProblemBinding make_tsp() {
  ProblemBinding b;
  b.kind = ProblemKind::kTsp;
  b.name = "the Traveling Salesman Problem (TSP)";
  b.description =
      "Given n cities as points in the unit square, find a closed tour that visits every city exactly "
      "once and returns to its start, minimizing the total Euclidean length.";
  b.baseline = R"(```python
def heuristic(coords: list) -> list:
    """
    Args:
        coords: list of n points [x, y] in the unit square.
    Returns:
        tour: list of the n city indices 0..n-1, each exactly once, in visiting order.
    """
```)";
  b.solution_key = "tour";
  return b;
}

ProblemBinding make_bpp() {
  ProblemBinding b;
  b.kind = ProblemKind::kBpp;
  b.name = "the online Bin Packing Problem (BPP)";
  b.description =
      "Items with sizes in (0, 1] arrive one at a time and must each be placed in a bin of capacity 1 "
      "when they arrive. No bin may exceed its capacity. Minimize the number of bins used.";
  b.baseline = R"(```python
def heuristic(items: list) -> list:
    """
    Args:
        items: list of item sizes in (0, 1], in arrival order.
    Returns:
        bins: list of bins, each a list of item indices; every item appears in exactly one bin.
    """
```)";
  b.solution_key = "bins";
  return b;
}

ProblemBinding make_mis() {
  ProblemBinding b;
  b.kind = ProblemKind::kMis;
  b.name = "the Maximum Independent Set problem (MIS)";
  b.description =
      "Given an undirected graph, select as many nodes as possible such that no two selected nodes "
      "share an edge.";
  b.baseline = R"(```python
def heuristic(num_nodes: int, edges: list) -> list:
    """
    Args:
        num_nodes: number of nodes, labelled 0..num_nodes-1.
        edges: list of [u, v] pairs.
    Returns:
        select: list of num_nodes values in {0, 1}; 1 marks a selected node.
    """
```)";
  b.solution_key = "select";
  return b;
}

ProblemBinding make_cvrp() {
  ProblemBinding b;
  b.kind = ProblemKind::kCvrp;
  b.name = "the Capacitated Vehicle Routing Problem (CVRP)";
  b.description =
      "A fleet of identical vehicles with capacity Q starts and ends at a depot. Every client has a "
      "demand and must be visited by exactly one route; the demand served by one route may not exceed "
      "Q and at most nb_vehicles routes may be used. Minimize the total Euclidean length of all routes.";
  b.baseline = R"(```python
def heuristic(depot: list, coords: list, demands: list, capacity: float, nb_vehicles: int) -> list:
    """
    Args:
        depot: [x, y] of the depot.
        coords: list of n client points [x, y].
        demands: list of n client demands.
        capacity: vehicle capacity Q.
        nb_vehicles: maximum number of routes.
    Returns:
        routes: list of routes, each a list of client indices 0..n-1; the depot is implicit at both ends.
    """
```)";
  b.solution_key = "routes";
  return b;
}

}  // namespace

const ProblemBinding& binding_for(ProblemKind kind) {
  static const std::array<ProblemBinding, 4> bindings{make_tsp(), make_bpp(), make_mis(), make_cvrp()};
  return bindings[static_cast<std::size_t>(kind)];
}

std::string driver_suffix(ProblemKind kind) {
  return fmt::format(R"(

if __name__ == "__main__":
    import json as _heurgen_json
    import sys as _heurgen_sys

    def _heurgen_plain(value):
        if hasattr(value, "tolist"):
            return value.tolist()
        if hasattr(value, "item"):
            return value.item()
        raise TypeError("cannot serialize " + type(value).__name__)

    _heurgen_instance = _heurgen_json.load(_heurgen_sys.stdin)
    _heurgen_result = heuristic(**_heurgen_instance)
    _heurgen_sys.stdout.flush()
    _heurgen_sys.stdout.write("\n" + _heurgen_json.dumps({{"solution": {{"{}": _heurgen_result}}}}, default=_heurgen_plain) + "\n")
    _heurgen_sys.stdout.flush()
)",
                     binding_for(kind).solution_key);
}

}  // namespace heurgen::problems
