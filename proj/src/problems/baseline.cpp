#include <algorithm>
#include <numeric>

#include "heurgen/problems/suite.hpp"

namespace heurgen::problems {

namespace {

TspSolution nearest_neighbour(const TspInstance& inst) {
  const int n = static_cast<int>(inst.coords.size());
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  TspSolution s;
  int cur = 0;
  used[0] = true;
  s.tour.push_back(0);
  for (int step = 1; step < n; ++step) {
    int next = -1;
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      double d = distance(inst.coords[static_cast<std::size_t>(cur)], inst.coords[static_cast<std::size_t>(j)]);
      if (next < 0 || d < best) {
        next = j;
        best = d;
      }
    }
    used[static_cast<std::size_t>(next)] = true;
    s.tour.push_back(next);
    cur = next;
  }
  return s;
}

BppSolution first_fit_decreasing(const BppInstance& inst) {
  std::vector<int> order(inst.items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.items[static_cast<std::size_t>(a)] > inst.items[static_cast<std::size_t>(b)];
  });
  BppSolution s;
  std::vector<double> load;
  for (int i : order) {
    const double w = inst.items[static_cast<std::size_t>(i)];
    std::size_t b = 0;
    while (b < load.size() && load[b] + w > 1.0 + 1e-9) ++b;
    if (b == load.size()) {
      load.push_back(0.0);
      s.bins.emplace_back();
    }
    load[b] += w;
    s.bins[b].push_back(i);
  }
  return s;
}

MisSolution min_degree_greedy(const MisInstance& inst) {
  const auto n = static_cast<std::size_t>(inst.num_nodes);
  std::vector<std::vector<int>> adj(n);
  for (auto [u, v] : inst.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  std::vector<bool> alive(n, true);
  std::vector<int> degree(n);
  for (std::size_t i = 0; i < n; ++i) degree[i] = static_cast<int>(adj[i].size());
  MisSolution s;
  s.select.assign(n, 0);
  while (true) {
    int pick = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i] && (pick < 0 || degree[i] < degree[static_cast<std::size_t>(pick)])) pick = static_cast<int>(i);
    }
    if (pick < 0) break;
    s.select[static_cast<std::size_t>(pick)] = 1;
    alive[static_cast<std::size_t>(pick)] = false;
    for (int v : adj[static_cast<std::size_t>(pick)]) {
      if (!alive[static_cast<std::size_t>(v)]) continue;
      alive[static_cast<std::size_t>(v)] = false;
      for (int w : adj[static_cast<std::size_t>(v)]) --degree[static_cast<std::size_t>(w)];
    }
  }
  return s;
}

CvrpSolution capacity_nearest_neighbour(const CvrpInstance& inst) {
  const std::size_t n = inst.coords.size();
  std::vector<bool> served(n, false);
  CvrpSolution s;
  std::size_t left = n;
  while (left > 0) {
    std::vector<int> route;
    double load = 0.0;
    Point cur = inst.depot;
    while (true) {
      int next = -1;
      double best = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (served[j] || load + inst.demands[j] > inst.capacity + 1e-9) continue;
        double d = distance(cur, inst.coords[j]);
        if (next < 0 || d < best) {
          next = static_cast<int>(j);
          best = d;
        }
      }
      if (next < 0) break;
      served[static_cast<std::size_t>(next)] = true;
      --left;
      load += inst.demands[static_cast<std::size_t>(next)];
      cur = inst.coords[static_cast<std::size_t>(next)];
      route.push_back(next);
    }
    if (route.empty()) break;  // a client heavier than the capacity
    s.routes.push_back(std::move(route));
  }
  return s;
}

}  // namespace

Reference constructive_reference(const ProblemInstance& instance) {
  Solution sol = std::visit(
      [](const auto& inst) -> Solution {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, TspInstance>) return nearest_neighbour(inst);
        else if constexpr (std::is_same_v<T, BppInstance>) return first_fit_decreasing(inst);
        else if constexpr (std::is_same_v<T, MisInstance>) return min_degree_greedy(inst);
        else return capacity_nearest_neighbour(inst);
      },
      instance);
  return {objective(instance, sol), sol};
}

}  // namespace heurgen::problems
