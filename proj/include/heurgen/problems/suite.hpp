#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "heurgen/problems/instance.hpp"

namespace heurgen::problems {

/// Revised Model B parameters; the graph has n_vars cliques of `domain` nodes.
struct RbParams {
  int n_vars_min = 20;
  int n_vars_max = 25;
  int domain_min = 5;
  int domain_max = 12;
  int nodes_min = 200;
  int nodes_max = 300;
  double tightness_min = 0.3;
  double tightness_max = 1.0;
};

/// RB parameters for a target node count: the two standard bands for 250
/// (RB-200-300) and 1000 (RB-800-1200), a +/-20% band otherwise.
RbParams rb_params_for_size(int size);

struct GeneratorParams {
  double weibull_shape = 3.0;
  double weibull_scale = 45.0;
  int demand_min = 1;
  int demand_max = 9;
  std::optional<double> cvrp_capacity;  // default scales with size
  std::optional<RbParams> rb;
};

/// Deterministic in (kind, size, seed, params).
ProblemInstance generate(ProblemKind kind, int size, std::uint64_t seed, const GeneratorParams& params = {});

std::string instance_id(ProblemKind kind, int size, std::uint64_t seed);

struct Validation {
  bool ok = true;
  std::string details;
};

Validation validate(const ProblemInstance& instance, const Solution& solution);

/// Parses and validates a raw payload; schema problems become violations.
Validation validate_payload(const ProblemInstance& instance, const nlohmann::json& payload);

/// Exact objective; throws invalid_solution when validate rejects.
double objective(const ProblemInstance& instance, const Solution& solution);

/// Signed percentage deviation; negative means better than the reference.
double gap(double objective, double reference, Sense sense);

struct Reference {
  double value = 0.0;
  Solution solution;
};

/// Largest size accepted by the exhaustive oracle for each kind.
int oracle_limit(ProblemKind kind);

/// Exact optimum by exhaustive enumeration; throws size_exceeds_oracle.
Reference brute_force_reference(const ProblemInstance& instance);

/// Reads `{instance_id: value}` from a sidecar; throws missing_reference_file.
double file_reference(const std::filesystem::path& sidecar, const std::string& instance_id);

}  // namespace heurgen::problems

namespace heurgen::problems {

/// Cheap constructive solution (nearest neighbour, first-fit decreasing,
/// min-degree greedy, capacity-aware nearest neighbour) used as a reference
/// when the instance is too large for the oracle and no sidecar exists.
Reference constructive_reference(const ProblemInstance& instance);

}  // namespace heurgen::problems
