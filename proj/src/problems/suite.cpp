#include "heurgen/problems/suite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"

namespace heurgen::problems {

namespace {

constexpr double kLoadTolerance = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Portable stream: mt19937_64 plus explicit conversions, so instance bytes
/// do not depend on the standard library's distribution implementations.
class Stream {
 public:
  Stream(ProblemKind kind, int size, std::uint64_t seed)
      : engine_(splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(kind) << 32) ^
                                             static_cast<std::uint64_t>(size)))) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

Point random_point(Stream& s) {
  double x = s.uniform();
  double y = s.uniform();
  return {x, y};
}

double default_cvrp_capacity(int n) {
  if (n <= 10) return 20.0;
  if (n <= 20) return 30.0;
  if (n <= 50) return 40.0;
  if (n <= 100) return 50.0;
  if (n <= 200) return 80.0;
  if (n <= 500) return 100.0;
  return 250.0;
}

MisInstance generate_rb(int size, Stream& s, const RbParams& p) {
  int n_vars = 0;
  int domain = 0;
  for (int attempt = 0;; ++attempt) {
    n_vars = s.integer(p.n_vars_min, p.n_vars_max);
    domain = s.integer(p.domain_min, p.domain_max);
    if (n_vars * domain >= p.nodes_min && n_vars * domain <= p.nodes_max) break;
    if (attempt > 100000) {
      throw Error(ErrorCode::kUnsupportedSize, fmt::format("RB parameters cannot reach {} nodes", size));
    }
  }
  double tightness = s.uniform(p.tightness_min, p.tightness_max);
  tightness = std::min(tightness, 1.0 - 1e-6);
  const double a = std::log(static_cast<double>(domain)) / std::log(static_cast<double>(n_vars));
  const double r = -a / std::log(1.0 - tightness);
  const int per_constraint =
      static_cast<int>(tightness * std::pow(static_cast<double>(n_vars), 2.0 * a));
  const int iterations = static_cast<int>(r * n_vars * std::log(static_cast<double>(n_vars)) - 1.0);

  MisInstance g;
  g.num_nodes = n_vars * domain;
  std::set<std::pair<int, int>> edges;
  for (int v = 0; v < n_vars; ++v) {
    for (int i = 0; i < domain; ++i) {
      for (int j = i + 1; j < domain; ++j) edges.emplace(v * domain + i, v * domain + j);
    }
  }
  for (int it = 0; it < iterations; ++it) {
    int vi = s.integer(0, n_vars - 1);
    int vj = s.integer(0, n_vars - 2);
    if (vj >= vi) ++vj;
    std::vector<std::pair<int, int>> open;
    for (int i = 0; i < domain; ++i) {
      for (int j = 0; j < domain; ++j) {
        int u = vi * domain + i;
        int w = vj * domain + j;
        std::pair<int, int> e{std::min(u, w), std::max(u, w)};
        if (!edges.count(e)) open.push_back(e);
      }
    }
    const int take = std::min<int>(per_constraint, static_cast<int>(open.size()));
    // partial Fisher-Yates for a sample without replacement
    for (int k = 0; k < take; ++k) {
      int pick = s.integer(k, static_cast<int>(open.size()) - 1);
      std::swap(open[static_cast<std::size_t>(k)], open[static_cast<std::size_t>(pick)]);
      edges.insert(open[static_cast<std::size_t>(k)]);
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

}  // namespace

RbParams rb_params_for_size(int size) {
  if (size == 250) return RbParams{};
  if (size == 1000) return RbParams{40, 55, 20, 25, 800, 1200, 0.3, 1.0};
  RbParams p;
  p.nodes_min = static_cast<int>(std::ceil(0.8 * size));
  p.nodes_max = static_cast<int>(std::floor(1.2 * size));
  const double root = std::sqrt(static_cast<double>(size));
  p.domain_min = std::max(2, static_cast<int>(std::lround(root / 2.0)));
  p.domain_max = std::max(p.domain_min, static_cast<int>(std::lround(root)));
  p.n_vars_min = std::max(2, (p.nodes_min + p.domain_max - 1) / p.domain_max);
  p.n_vars_max = std::max(p.n_vars_min, p.nodes_max / p.domain_min);
  return p;
}

std::string instance_id(ProblemKind kind, int size, std::uint64_t seed) {
  return fmt::format("{}-{}-{}", to_string(kind), size, seed);
}

ProblemInstance generate(ProblemKind kind, int size, std::uint64_t seed, const GeneratorParams& params) {
  constexpr int kMaxSize = 100000;
  const int min_size = kind == ProblemKind::kTsp ? 3 : kind == ProblemKind::kMis ? 4 : 1;
  if (size < min_size || size > kMaxSize) {
    throw Error(ErrorCode::kUnsupportedSize,
                fmt::format("{} size {} outside [{}, {}]", to_string(kind), size, min_size, kMaxSize));
  }
  Stream s(kind, size, seed);
  switch (kind) {
    case ProblemKind::kTsp: {
      TspInstance t;
      t.coords.reserve(static_cast<std::size_t>(size));
      for (int i = 0; i < size; ++i) t.coords.push_back(random_point(s));
      return t;
    }
    case ProblemKind::kBpp: {
      BppInstance b;
      for (int i = 0; i < size; ++i) {
        // inverse-CDF Weibull sample, scaled into (0, 1]
        double u = s.uniform();
        double sample = params.weibull_scale * std::pow(-std::log1p(-u), 1.0 / params.weibull_shape);
        b.items.push_back(std::clamp(sample / 100.0, 1e-6, 1.0));
      }
      return b;
    }
    case ProblemKind::kMis: return generate_rb(size, s, params.rb ? *params.rb : rb_params_for_size(size));
    case ProblemKind::kCvrp: {
      CvrpInstance c;
      c.depot = random_point(s);
      double total = 0.0;
      for (int i = 0; i < size; ++i) {
        c.coords.push_back(random_point(s));
        double d = s.integer(params.demand_min, params.demand_max);
        c.demands.push_back(d);
        total += d;
      }
      c.capacity = params.cvrp_capacity ? *params.cvrp_capacity : default_cvrp_capacity(size);
      c.capacity = std::max(c.capacity, static_cast<double>(params.demand_max));
      c.nb_vehicles = std::min(size, static_cast<int>(std::ceil(1.3 * total / c.capacity)) + 3);
      return c;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown problem kind");
}

namespace {

Validation violation(std::string details) { return {false, std::move(details)}; }

Validation check_permutation(const std::vector<int>& order, int n, std::string_view what) {
  if (static_cast<int>(order.size()) != n) {
    return violation(fmt::format("{} has {} entries, expected {}", what, order.size(), n));
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int v : order) {
    if (v < 0 || v >= n) return violation(fmt::format("{} entry {} out of range", what, v));
    if (seen[static_cast<std::size_t>(v)]) return violation(fmt::format("node {} visited twice", v));
    seen[static_cast<std::size_t>(v)] = 1;
  }
  return {};
}

Validation validate_tsp(const TspInstance& inst, const TspSolution& sol) {
  return check_permutation(sol.tour, static_cast<int>(inst.coords.size()), "tour");
}

Validation validate_bpp(const BppInstance& inst, const BppSolution& sol) {
  const int n = static_cast<int>(inst.items.size());
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (std::size_t b = 0; b < sol.bins.size(); ++b) {
    double load = 0.0;
    for (int i : sol.bins[b]) {
      if (i < 0 || i >= n) return violation(fmt::format("bin {} holds unknown item {}", b, i));
      if (seen[static_cast<std::size_t>(i)]) return violation(fmt::format("item {} packed twice", i));
      seen[static_cast<std::size_t>(i)] = 1;
      load += inst.items[static_cast<std::size_t>(i)];
    }
    if (load > 1.0 + kLoadTolerance) {
      return violation(fmt::format("bin {} load {} exceeds capacity 1", b, load));
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) return violation(fmt::format("item {} is not packed", i));
  }
  return {};
}

Validation validate_mis(const MisInstance& inst, const MisSolution& sol) {
  if (static_cast<int>(sol.select.size()) != inst.num_nodes) {
    return violation(fmt::format("select has {} entries, expected {}", sol.select.size(), inst.num_nodes));
  }
  for (std::size_t i = 0; i < sol.select.size(); ++i) {
    if (sol.select[i] != 0 && sol.select[i] != 1) {
      return violation(fmt::format("select[{}] = {} is not binary", i, sol.select[i]));
    }
  }
  for (const auto& [u, v] : inst.edges) {
    if (sol.select[static_cast<std::size_t>(u)] && sol.select[static_cast<std::size_t>(v)]) {
      return violation(fmt::format("adjacent nodes selected: edge ({}, {})", u, v));
    }
  }
  return {};
}

Validation validate_cvrp(const CvrpInstance& inst, const CvrpSolution& sol) {
  const int n = static_cast<int>(inst.coords.size());
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int used = 0;
  for (std::size_t r = 0; r < sol.routes.size(); ++r) {
    if (sol.routes[r].empty()) continue;
    ++used;
    double load = 0.0;
    for (int c : sol.routes[r]) {
      if (c < 0 || c >= n) return violation(fmt::format("route {} visits unknown client {}", r, c));
      if (seen[static_cast<std::size_t>(c)]) return violation(fmt::format("client {} visited twice", c));
      seen[static_cast<std::size_t>(c)] = 1;
      load += inst.demands[static_cast<std::size_t>(c)];
    }
    if (load > inst.capacity + kLoadTolerance) {
      return violation(fmt::format("route {} load {} exceeds capacity {}", r, load, inst.capacity));
    }
  }
  for (int c = 0; c < n; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) return violation(fmt::format("client {} is not visited", c));
  }
  if (used > inst.nb_vehicles) {
    return violation(fmt::format("{} routes exceed the fleet of {} vehicles", used, inst.nb_vehicles));
  }
  return {};
}

double tour_length(const std::vector<Point>& pts, const std::vector<int>& tour) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
    total += distance(pts[static_cast<std::size_t>(tour[i])], pts[static_cast<std::size_t>(tour[i + 1])]);
  }
  if (tour.size() > 1) {
    total += distance(pts[static_cast<std::size_t>(tour.back())], pts[static_cast<std::size_t>(tour.front())]);
  }
  return total;
}

double route_length(const CvrpInstance& inst, const std::vector<int>& route) {
  if (route.empty()) return 0.0;
  double total = distance(inst.depot, inst.coords[static_cast<std::size_t>(route.front())]);
  for (std::size_t i = 0; i + 1 < route.size(); ++i) {
    total += distance(inst.coords[static_cast<std::size_t>(route[i])],
                      inst.coords[static_cast<std::size_t>(route[i + 1])]);
  }
  total += distance(inst.coords[static_cast<std::size_t>(route.back())], inst.depot);
  return total;
}

}  // namespace

Validation validate(const ProblemInstance& instance, const Solution& solution) {
  if (instance.index() != solution.index()) {
    throw Error(ErrorCode::kSchemaMismatch, "solution kind does not match instance kind");
  }
  switch (kind_of(instance)) {
    case ProblemKind::kTsp: return validate_tsp(std::get<TspInstance>(instance), std::get<TspSolution>(solution));
    case ProblemKind::kBpp: return validate_bpp(std::get<BppInstance>(instance), std::get<BppSolution>(solution));
    case ProblemKind::kMis: return validate_mis(std::get<MisInstance>(instance), std::get<MisSolution>(solution));
    case ProblemKind::kCvrp:
      return validate_cvrp(std::get<CvrpInstance>(instance), std::get<CvrpSolution>(solution));
  }
  return violation("unknown problem kind");
}

Validation validate_payload(const ProblemInstance& instance, const nlohmann::json& payload) {
  try {
    return validate(instance, solution_from_json(kind_of(instance), payload));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSchemaMismatch) throw;
    return violation(e.what());
  } catch (const nlohmann::json::exception& e) {
    return violation(fmt::format("schema_mismatch: {}", e.what()));
  }
}

double objective(const ProblemInstance& instance, const Solution& solution) {
  auto check = validate(instance, solution);
  if (!check.ok) throw Error(ErrorCode::kInvalidSolution, check.details);
  switch (kind_of(instance)) {
    case ProblemKind::kTsp:
      return tour_length(std::get<TspInstance>(instance).coords, std::get<TspSolution>(solution).tour);
    case ProblemKind::kBpp: {
      const auto& bins = std::get<BppSolution>(solution).bins;
      return static_cast<double>(
          std::count_if(bins.begin(), bins.end(), [](const auto& b) { return !b.empty(); }));
    }
    case ProblemKind::kMis: {
      const auto& sel = std::get<MisSolution>(solution).select;
      return static_cast<double>(std::accumulate(sel.begin(), sel.end(), 0));
    }
    case ProblemKind::kCvrp: {
      const auto& inst = std::get<CvrpInstance>(instance);
      double total = 0.0;
      for (const auto& r : std::get<CvrpSolution>(solution).routes) total += route_length(inst, r);
      return total;
    }
  }
  return 0.0;
}

double gap(double objective, double reference, Sense sense) {
  if (reference == 0.0) throw Error(ErrorCode::kZeroReference, "gap reference is zero");
  if (sense == Sense::kMinimize) return (objective - reference) / reference * 100.0;
  return (reference - objective) / reference * 100.0;
}

int oracle_limit(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kTsp: return 10;
    case ProblemKind::kMis: return 20;
    case ProblemKind::kBpp: return 12;
    case ProblemKind::kCvrp: return 8;
  }
  return 0;
}

namespace {

int instance_size(const ProblemInstance& instance) {
  return std::visit(
      [](const auto& inst) -> int {
        using T = std::decay_t<decltype(inst)>;
        if constexpr (std::is_same_v<T, BppInstance>) {
          return static_cast<int>(inst.items.size());
        } else if constexpr (std::is_same_v<T, MisInstance>) {
          return inst.num_nodes;
        } else {
          return static_cast<int>(inst.coords.size());
        }
      },
      instance);
}

Reference tsp_oracle(const TspInstance& inst) {
  const int n = static_cast<int>(inst.coords.size());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Reference best{std::numeric_limits<double>::infinity(), TspSolution{perm}};
  // node 0 stays first; every rotation of a cycle has the same length
  do {
    double len = tour_length(inst.coords, perm);
    if (len < best.value) best = {len, TspSolution{perm}};
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return best;
}

Reference mis_oracle(const MisInstance& inst) {
  const int n = inst.num_nodes;
  std::vector<std::uint32_t> adj(static_cast<std::size_t>(n), 0);
  for (const auto& [u, v] : inst.edges) {
    adj[static_cast<std::size_t>(u)] |= 1u << v;
    adj[static_cast<std::size_t>(v)] |= 1u << u;
  }
  std::uint32_t best_mask = 0;
  int best_size = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    int size = __builtin_popcount(mask);
    if (size <= best_size) continue;
    bool independent = true;
    for (int v = 0; v < n && independent; ++v) {
      if ((mask >> v & 1u) && (adj[static_cast<std::size_t>(v)] & mask)) independent = false;
    }
    if (independent) {
      best_size = size;
      best_mask = mask;
    }
  }
  MisSolution sol;
  for (int v = 0; v < n; ++v) sol.select.push_back(static_cast<int>(best_mask >> v & 1u));
  return {static_cast<double>(best_size), sol};
}

void bpp_search(const BppInstance& inst, std::size_t item, std::vector<std::vector<int>>& bins,
                std::vector<double>& loads, BppSolution& best, std::size_t& best_count) {
  if (bins.size() >= best_count) return;
  if (item == inst.items.size()) {
    best.bins = bins;
    best_count = bins.size();
    return;
  }
  const double size = inst.items[item];
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (loads[b] + size > 1.0 + kLoadTolerance) continue;
    bins[b].push_back(static_cast<int>(item));
    loads[b] += size;
    bpp_search(inst, item + 1, bins, loads, best, best_count);
    loads[b] -= size;
    bins[b].pop_back();
  }
  bins.push_back({static_cast<int>(item)});
  loads.push_back(size);
  bpp_search(inst, item + 1, bins, loads, best, best_count);
  loads.pop_back();
  bins.pop_back();
}

Reference bpp_oracle(const BppInstance& inst) {
  BppSolution best;
  std::size_t best_count = inst.items.size() + 1;
  std::vector<std::vector<int>> bins;
  std::vector<double> loads;
  bpp_search(inst, 0, bins, loads, best, best_count);
  return {static_cast<double>(best_count), best};
}

Reference cvrp_oracle(const CvrpInstance& inst) {
  const int n = static_cast<int>(inst.coords.size());
  const std::size_t subsets = std::size_t{1} << n;
  // best visiting order for every client subset, by permutation enumeration
  std::vector<double> subset_cost(subsets, std::numeric_limits<double>::infinity());
  std::vector<std::vector<int>> subset_route(subsets);
  std::vector<double> subset_load(subsets, 0.0);
  subset_cost[0] = 0.0;
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    std::vector<int> members;
    for (int c = 0; c < n; ++c) {
      if (mask >> c & 1u) {
        members.push_back(c);
        subset_load[mask] += inst.demands[static_cast<std::size_t>(c)];
      }
    }
    if (subset_load[mask] > inst.capacity + kLoadTolerance) continue;
    do {
      double len = route_length(inst, members);
      if (len < subset_cost[mask]) {
        subset_cost[mask] = len;
        subset_route[mask] = members;
      }
    } while (std::next_permutation(members.begin(), members.end()));
  }

  // enumerate set partitions: each block contains its lowest unassigned client
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_blocks;
  std::vector<std::size_t> blocks;
  const std::size_t full = subsets - 1;
  auto recurse = [&](auto&& self, std::size_t assigned, double cost) -> void {
    if (static_cast<int>(blocks.size()) > inst.nb_vehicles) return;
    if (assigned == full) {
      if (cost < best) {
        best = cost;
        best_blocks = blocks;
      }
      return;
    }
    int first = 0;
    while (assigned >> first & 1u) ++first;
    const std::size_t rest = full & ~assigned & ~(std::size_t{1} << first);
    // iterate all subsets of `rest`, each joined with `first`
    for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
      const std::size_t block = sub | (std::size_t{1} << first);
      if (std::isfinite(subset_cost[block])) {
        blocks.push_back(block);
        self(self, assigned | block, cost + subset_cost[block]);
        blocks.pop_back();
      }
      if (sub == 0) break;
    }
  };
  recurse(recurse, 0, 0.0);
  CvrpSolution sol;
  for (auto b : best_blocks) sol.routes.push_back(subset_route[b]);
  // re-sum in route order so the value equals objective() bit for bit
  double value = 0.0;
  for (const auto& r : sol.routes) value += route_length(inst, r);
  return {value, sol};
}

}  // namespace

Reference brute_force_reference(const ProblemInstance& instance) {
  const auto kind = kind_of(instance);
  if (instance_size(instance) > oracle_limit(kind)) {
    throw Error(ErrorCode::kSizeExceedsOracle,
                fmt::format("{} instance of size {} exceeds the exhaustive limit {}", to_string(kind),
                            instance_size(instance), oracle_limit(kind)));
  }
  switch (kind) {
    case ProblemKind::kTsp: return tsp_oracle(std::get<TspInstance>(instance));
    case ProblemKind::kMis: return mis_oracle(std::get<MisInstance>(instance));
    case ProblemKind::kBpp: return bpp_oracle(std::get<BppInstance>(instance));
    case ProblemKind::kCvrp: return cvrp_oracle(std::get<CvrpInstance>(instance));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown problem kind");
}

double file_reference(const std::filesystem::path& sidecar, const std::string& id) {
  std::ifstream in(sidecar);
  if (!in) {
    throw Error(ErrorCode::kMissingReferenceFile, fmt::format("cannot open {}", sidecar.string()));
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMissingReferenceFile, fmt::format("{}: {}", sidecar.string(), e.what()));
  }
  if (!doc.contains(id)) {
    throw Error(ErrorCode::kMissingReferenceFile,
                fmt::format("{} has no reference for {}", sidecar.string(), id));
  }
  return doc.at(id).get<double>();
}

}  // namespace heurgen::problems
