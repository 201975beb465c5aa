#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "heurgen/core/model.hpp"

namespace heurgen::core {

struct ParseOptions {
  int max_func_num = kDefaultMaxFuncNum;
};

struct ParsedStructure {
  StructureCode structure;
  std::vector<std::string> warnings;
};

/// Extracts the hyperparameter block and `func_<k>` placeholders from a
/// fenced or raw program. Realized `func_<k>` bodies are reduced to stubs in
/// the returned source. Non-contiguous ids are renumbered from 1 and reported
/// as a warning.
ParsedStructure parse_structure(std::string_view program, const ParseOptions& options = {});

/// A program split into its structure and whichever slot bodies it realizes.
struct Decomposed {
  StructureCode structure;
  std::map<int, FunctionImpl> impls;
  std::vector<std::string> warnings;
};

Decomposed decompose(std::string_view program, const ParseOptions& options = {});

/// Source text of every `def func_<id>` definition in `program`, keyed by id.
std::map<int, std::string> extract_slot_definitions(std::string_view program);

/// Replaces every realized `func_<k>` body with a stub keeping the def
/// header and its `# Purpose:` line.
std::string strip_to_stubs(std::string_view program);

/// Rewrites the marker-delimited block from `hyper_block`.
std::string rewrite_hyper_block(std::string_view source, const std::vector<HyperParam>& hyper_block);

/// Returns `structure` with the named values replaced; the source is
/// rewritten to match. Unknown names are ignored.
StructureCode with_hyper_values(const StructureCode& structure,
                                const std::vector<HyperParam>& replacements);

/// Formats a value as a Python literal that round-trips through parsing.
std::string hyper_literal(double value, bool is_integer);

/// The structure with stub bodies replaced by the given implementations
/// (slots without an impl keep their stub).
std::string realize(const StructureCode& structure, const std::map<int, FunctionImpl>& impls);

/// A reusable function that may be called by name from candidate code.
struct KnowledgeFunction {
  std::string name;
  std::string body;
  ImplOrigin origin = ImplOrigin::kHeuBase;
};

/// Ordered, read-only view over the HeuBase and Adaptive Memory entries
/// available to a run.
struct KnowledgeView {
  std::vector<KnowledgeFunction> functions;

  const KnowledgeFunction* find(std::string_view name) const;
};

/// Self-contained program: referenced knowledge bodies first, then the
/// realized structure with knowledge import lines removed.
std::string assemble(const HeuristicIndividual& individual, const KnowledgeView& knowledge);

/// Names of knowledge functions the program calls or imports.
std::vector<std::string> referenced_knowledge(std::string_view program, const KnowledgeView& knowledge);

}  // namespace heurgen::core
