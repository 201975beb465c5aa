#pragma once

#include <string>

#include "heurgen/problems/instance.hpp"

namespace heurgen::problems {

/// What a candidate program needs to know about a problem: prompt-facing
/// descriptions plus the entry point and I/O glue of the sandbox protocol.
struct ProblemBinding {
  ProblemKind kind = ProblemKind::kTsp;
  std::string name;         // {problem}
  std::string description;  // {problem_description}
  std::string baseline;     // {baseline}: the entry-point signature
  std::string solution_key;
};

const ProblemBinding& binding_for(ProblemKind kind);

/// Python footer that reads the instance from stdin, calls `heuristic`, and
/// prints the final `{"solution": ...}` document on stdout.
std::string driver_suffix(ProblemKind kind);

}  // namespace heurgen::problems
