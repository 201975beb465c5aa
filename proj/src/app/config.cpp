#include "heurgen/app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"

namespace heurgen::app {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kConfigInvalid, m); };
  if (run_id.empty()) fail("run_id must not be empty");
  if (problem.validation_seeds.empty()) fail("problem.validation_seeds must not be empty");
  std::set<std::uint64_t> val(problem.validation_seeds.begin(), problem.validation_seeds.end());
  for (auto s : problem.test_seeds) {
    if (val.count(s)) fail(fmt::format("seed {} appears in both validation and test sets", s));
  }
  if (problem.timeout_s < 1) fail("problem.timeout_s must be at least 1");
  if (problem.reference == ReferenceMode::kFile && !problem.reference_file) fail("reference mode 'file' needs reference_file");
  if (budget_limit < 0) fail("budget.limit must be non-negative");
  if (!(calibration_fraction > 0 && calibration_fraction <= 1)) fail("education.calibration_fraction must lie in (0, 1]");
  if (max_func_num < 1) fail("max_func_num must be at least 1");
  if (llm.provider != "mock" && llm.provider != "http") fail("llm.provider must be 'mock' or 'http'");
  if (llm.provider == "mock" && llm.transcript.empty()) fail("the mock provider needs llm.transcript");
  ga.validate();
  education.validate();
  am.validate();
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.ga.rng_seed = seed;
  cfg.education.seed = seed;
}

namespace {

ReferenceMode reference_mode(const std::string& s) {
  if (s == "auto") return ReferenceMode::kAuto;
  if (s == "oracle") return ReferenceMode::kOracle;
  if (s == "file") return ReferenceMode::kFile;
  if (s == "constructive") return ReferenceMode::kConstructive;
  throw Error(ErrorCode::kConfigInvalid, fmt::format("unknown reference mode '{}'", s));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  if (!doc.at(name).is_object()) throw Error(ErrorCode::kConfigInvalid, fmt::format("'{}' must be an object", name));
  return doc.at(name);
}

}  // namespace

RunConfig config_from_json(const json& doc, const fs::path& base) {
  if (!doc.is_object()) throw Error(ErrorCode::kConfigInvalid, "config must be a JSON object");
  RunConfig c;
  try {
    c.raw = doc;
    c.seed = doc.value("seed", std::uint64_t{0});
    c.run_id = doc.value("run_id", fmt::format("run-{}", c.seed));
    c.output_dir = resolve(base, doc.value("output_dir", std::string("runs")));
    c.prompts_dir = doc.contains("prompts_dir") ? resolve(base, doc.at("prompts_dir").get<std::string>())
                                                : fs::path(HEURGEN_PROMPTS_DIR);
    c.max_func_num = doc.value("max_func_num", c.max_func_num);

    const auto& p = section(doc, "problem");
    c.problem.kind = problems::problem_kind_from_string(p.value("kind", std::string("tsp")));
    c.problem.size = p.value("size", c.problem.size);
    c.problem.validation_seeds = p.value("validation_seeds", c.problem.validation_seeds);
    c.problem.test_seeds = p.value("test_seeds", c.problem.test_seeds);
    c.problem.reference = reference_mode(p.value("reference", std::string("auto")));
    if (p.contains("reference_file")) c.problem.reference_file = resolve(base, p.at("reference_file").get<std::string>());
    c.problem.tags = p.value("tags", std::vector<std::string>{std::string(problems::to_string(c.problem.kind))});
    c.problem.alg_type = p.value("alg_type", c.problem.alg_type);
    c.problem.timeout_s = p.value("timeout_s", c.problem.timeout_s);

    const auto& b = section(doc, "budget");
    c.budget_mode = llm::budget_mode_from_string(b.value("mode", std::string("tokens")));
    c.budget_limit = b.value("limit", c.budget_limit);

    const auto& g = section(doc, "ga");
    c.ga.init_pop_size = g.value("init_pop_size", c.ga.init_pop_size);
    c.ga.max_pop_size = g.value("max_pop_size", c.ga.max_pop_size);
    c.ga.p_c = g.value("p_c", c.ga.p_c);
    c.ga.p_m = g.value("p_m", c.ga.p_m);
    c.ga.generations = g.value("generations", c.ga.generations);
    c.ga.am_interval = g.value("am_interval", c.ga.am_interval);
    c.ga.init_retries = g.value("init_retries", c.ga.init_retries);

    const auto& e = section(doc, "education");
    c.education.mc_func_pop = e.value("mc_func_pop", c.education.mc_func_pop);
    c.education.max_fix_try = e.value("max_fix_try", c.education.max_fix_try);
    c.education.calibration = e.value("calibration", c.education.calibration);
    c.education.one_shot = e.value("one_shot", c.education.one_shot);
    c.education.calibration_evals = e.value("calibration_evals", c.education.calibration_evals);
    c.calibration_fraction = e.value("calibration_fraction", c.calibration_fraction);

    c.am = memory::am_config_from_json(section(doc, "am"));

    const auto& l = section(doc, "llm");
    c.llm.provider = l.value("provider", c.llm.provider);
    if (l.contains("transcript")) c.llm.transcript = resolve(base, l.at("transcript").get<std::string>());
    c.llm.http.base_url = l.value("base_url", c.llm.http.base_url);
    c.llm.http.model = l.value("model", c.llm.http.model);
    c.llm.http.api_key_env = l.value("api_key_env", c.llm.http.api_key_env);
    c.llm.http.max_attempts = l.value("max_attempts", c.llm.http.max_attempts);
    c.llm.http.backoff_initial_s = l.value("backoff_s", c.llm.http.backoff_initial_s);
    c.llm.http.request_timeout_s = l.value("request_timeout_s", c.llm.http.request_timeout_s);
    c.llm.temperatures.fixing_temperature = l.value("fixing_temperature", c.llm.temperatures.fixing_temperature);
    c.llm.temperatures.default_temperature = l.value("default_temperature", c.llm.temperatures.default_temperature);

    const auto& k = section(doc, "knowledge");
    if (k.contains("heubase_manifest") && !k.at("heubase_manifest").is_null())
      c.knowledge.heubase_manifest = resolve(base, k.at("heubase_manifest").get<std::string>());
    if (k.contains("knobase_dir") && !k.at("knobase_dir").is_null())
      c.knowledge.knobase_dir = resolve(base, k.at("knobase_dir").get<std::string>());

    const auto& s = section(doc, "sandbox");
    if (s.contains("interpreter")) c.sandbox.interpreter_command = s.at("interpreter").get<std::vector<std::string>>();
    c.sandbox.wrapper = s.value("wrapper", c.sandbox.wrapper);
    c.sandbox.grace_s = s.value("grace_s", c.sandbox.grace_s);
    c.sandbox.memory_limit_mb = s.value("memory_limit_mb", c.sandbox.memory_limit_mb);
    c.sandbox.workers = s.value("workers", c.sandbox.workers);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kConfigInvalid, ex.what());
  }
  apply_seed(c, c.seed);
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfigInvalid, fmt::format("cannot read config {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  auto doc = json::parse(ss.str(), nullptr, false, true);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfigInvalid, fmt::format("{} is not valid JSON", path.string()));
  return config_from_json(doc, fs::absolute(path).parent_path());
}

}  // namespace heurgen::app
