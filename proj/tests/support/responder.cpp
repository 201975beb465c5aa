#include "responder.hpp"

#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "heurgen/common/error.hpp"
#include "heurgen/common/text.hpp"
#include "heurgen/core/structure.hpp"

namespace heurgen::testing {

using nlohmann::json;

namespace {

std::string fenced(const std::string& code) { return "```python\n" + code + "\n```"; }

const char* kGarbage = "I am not able to produce code for this request right now.";

}  // namespace

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string last_fenced_block(const std::string& text) {
  auto close = text.rfind("```");
  if (close == std::string::npos || close == 0) return text;
  auto open = text.rfind("```", close - 1);
  if (open == std::string::npos) return text;
  auto body_start = text.find('\n', open);
  if (body_start == std::string::npos || body_start > close) return text;
  return text.substr(body_start + 1, close - body_start - 1);
}

std::string tsp_structure(int slots, int start, double weight, const std::vector<double>& mark) {
  std::string s = "import math\n\n#Hyperparameter#\nMAX_TIME = 2\n";
  s += fmt::format("START = {}  # int\nWEIGHT = {:.2f}\n", start, weight);
  if (!mark.empty()) s += fmt::format("QUALITY_MARK = {:.4f}\n", mark.front());
  s += "#Hyperparameter#\n\n\n";
  s += "def func_1(coords, current, unvisited):\n    # Purpose: choose the next city to visit\n    pass\n\n\n";
  if (slots >= 2) s += "def func_2(coords, tour):\n    # Purpose: improve a complete tour\n    pass\n\n\n";
  if (slots >= 3) s += "def func_3(tour):\n    # Purpose: orient the final tour\n    pass\n\n\n";
  s +=
      "def heuristic(coords: list) -> list:\n"
      "    n = len(coords)\n"
      "    start = min(max(int(START), 0), n - 1)\n"
      "    tour = [start]\n"
      "    unvisited = set(range(n))\n"
      "    unvisited.discard(start)\n"
      "    while unvisited:\n"
      "        nxt = func_1(coords, tour[-1], unvisited)\n"
      "        tour.append(nxt)\n"
      "        unvisited.discard(nxt)\n";
  if (slots >= 2) s += "    tour = func_2(coords, tour)\n";
  if (slots >= 3) s += "    tour = func_3(tour)\n";
  s += "    return tour\n";
  return s;
}

std::string tsp_impl(int slot, int variant) {
  if (slot == 1) {
    static const char* bodies[] = {
        "    return min(unvisited, key=lambda j: math.dist(coords[current], coords[j]))\n",
        "    return min(unvisited)\n",
        "    return max(unvisited, key=lambda j: math.dist(coords[current], coords[j]))\n",
        "    return min(unvisited, key=lambda j: math.dist(coords[current], coords[j]) * (1.0 + WEIGHT * j / len(coords)))\n",
    };
    return std::string("def func_1(coords, current, unvisited):\n") + bodies[variant % 4];
  }
  if (slot == 2) {
    if (variant % 2 == 0) return "def func_2(coords, tour):\n    return list(tour)\n";
    return "def func_2(coords, tour):\n"
           "    best = list(tour)\n"
           "    improved = True\n"
           "    while improved:\n"
           "        improved = False\n"
           "        for i in range(1, len(best) - 1):\n"
           "            for j in range(i + 1, len(best)):\n"
           "                a, b = coords[best[i - 1]], coords[best[i]]\n"
           "                c, d = coords[best[j]], coords[best[(j + 1) % len(best)]]\n"
           "                if math.dist(a, c) + math.dist(b, d) < math.dist(a, b) + math.dist(c, d) - 1e-12:\n"
           "                    best[i:j + 1] = reversed(best[i:j + 1])\n"
           "                    improved = True\n"
           "    return best\n";
  }
  if (variant % 2 == 0) return "def func_3(tour):\n    return list(tour)\n";
  return "def func_3(tour):\n    return list(reversed(tour))\n";
}

std::string broken_impl(int slot) {
  static const char* heads[] = {"", "def func_1(coords, current, unvisited):\n", "def func_2(coords, tour):\n",
                                "def func_3(tour):\n"};
  return std::string(heads[slot]) + fmt::format("    raise ValueError(\"broken func_{}\")\n", slot);
}

Responder::Responder(ResponderOptions options) : opt_(std::move(options)), rng_(opt_.seed) {}

double Responder::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

llm::ChatResponse Responder::complete(const llm::ChatRequest& request, double /*temperature*/) {
  ++calls_;
  std::string text;
  switch (request.tag) {
    case llm::Tag::kFixing: text = fix_reply(request.user); break;
    case llm::Tag::kCalibrationRanges: text = ranges_reply(request.user); break;
    case llm::Tag::kAmNaming: text = naming_reply(request.user); break;
    case llm::Tag::kGeneration:
      if (request.user.find("You are required to complete func_") != std::string::npos) {
        text = fill_one_reply(request.user);
      } else if (request.user.find("implement all the functions named func_i()") != std::string::npos) {
        text = fill_all_reply(request.user);
      } else {
        text = structure_reply();
      }
      break;
  }
  llm::ChatResponse r;
  r.text = std::move(text);
  if (opt_.max_usage > 0) {
    const auto total = 2 + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(opt_.max_usage - 1));
    r.prompt_tokens = total / 2;
    r.completion_tokens = total - total / 2;
    max_usage_seen_ = std::max(max_usage_seen_, total);
  } else {
    r.prompt_tokens = -1;
    r.completion_tokens = -1;
  }
  return r;
}

std::string Responder::structure_reply() {
  const auto k = structures_++;
  if (opt_.garbage_rate > 0 && uniform() < opt_.garbage_rate) return kGarbage;
  const int span = opt_.max_slots - opt_.min_slots + 1;
  const int slots = opt_.min_slots + static_cast<int>(rng_() % static_cast<std::uint64_t>(span));
  const int start = static_cast<int>(rng_() % 4);
  const double weight = static_cast<double>(rng_() % 100) / 100.0;
  std::vector<double> mark;
  if (!opt_.marks.empty()) mark.push_back(opt_.marks[static_cast<std::size_t>(k) % opt_.marks.size()]);
  return "Here is a structure.\n\n" + fenced(tsp_structure(slots, start, weight, mark));
}

std::string Responder::fill_one_reply(const std::string& user) {
  static const std::regex id_re(R"(You are required to complete func_([0-9]+))");
  std::smatch m;
  std::regex_search(user, m, id_re);
  const int id = std::stoi(m[1].str());
  if (opt_.garbage_rate > 0 && uniform() < opt_.garbage_rate) return kGarbage;
  auto d = core::decompose(last_fenced_block(user));
  const bool broken = opt_.broken_rate > 0 && uniform() < opt_.broken_rate;
  const int variant = static_cast<int>(rng_() % 4);
  d.impls[id] = {id, broken ? broken_impl(id) : tsp_impl(id, variant), core::ImplOrigin::kLlmGenerated};
  return fenced(core::realize(d.structure, d.impls));
}

std::string Responder::fill_all_reply(const std::string& user) {
  if (opt_.garbage_rate > 0 && uniform() < opt_.garbage_rate) return kGarbage;
  auto d = core::decompose(last_fenced_block(user));
  for (const auto& slot : d.structure.slots) {
    if (d.impls.count(slot.id)) continue;
    const bool broken = opt_.broken_rate > 0 && uniform() < opt_.broken_rate;
    const int variant = static_cast<int>(rng_() % 4);
    d.impls[slot.id] = {slot.id, broken ? broken_impl(slot.id) : tsp_impl(slot.id, variant),
                        core::ImplOrigin::kLlmGenerated};
  }
  return fenced(core::realize(d.structure, d.impls));
}

std::string Responder::fix_reply(const std::string& user) {
  auto d = core::decompose(last_fenced_block(user));
  for (auto& [id, impl] : d.impls) {
    if (impl.source.find("broken") != std::string::npos) impl.source = tsp_impl(id, 0);
  }
  return fenced(core::realize(d.structure, d.impls));
}

std::string Responder::ranges_reply(const std::string& user) {
  auto d = core::decompose(last_fenced_block(user));
  std::string dict = "pms_dict = {\n";
  for (const auto& h : d.structure.hyper_block) {
    if (h.name == "MAX_TIME" || h.name == "QUALITY_MARK") continue;
    dict += h.is_integer ? fmt::format("    \"{}\": (0, 5),\n", h.name) : fmt::format("    \"{}\": (0.0, 1.0),\n", h.name);
  }
  dict += "}";
  return fenced(dict);
}

std::string Responder::naming_reply(const std::string& user) {
  const auto code = text::first_fenced_block(user).value_or(user);
  static const std::regex head_re(R"(def\s+[A-Za-z_][A-Za-z0-9_]*\s*\(([^)]*)\))");
  std::smatch m;
  const std::string args = std::regex_search(code, m, head_re) ? m[1].str() : "";
  const auto name = fmt::format("mem_helper_{}", names_++);
  return fenced(fmt::format("def {}({}):\n    \"\"\"\n    Reusable step taken from an elite program.\n    \"\"\"", name, args));
}

json Responder::state() const {
  std::ostringstream ss;
  ss << rng_;
  return {{"rng", ss.str()}, {"calls", calls_}, {"structures", structures_}, {"names", names_}};
}

void Responder::restore(const json& state) {
  std::istringstream ss(state.at("rng").get<std::string>());
  ss >> rng_;
  calls_ = state.at("calls").get<std::int64_t>();
  structures_ = state.at("structures").get<std::int64_t>();
  names_ = state.at("names").get<std::int64_t>();
}

education::Evaluation StubEvaluator::evaluate(const std::string& program, education::Split /*split*/) {
  ++evaluations_;
  education::Evaluation ev;
  if (program.find("raise ValueError(\"broken") != std::string::npos) {
    sandbox::EvaluationReport rep;
    rep.status = sandbox::Status::kRuntimeError;
    rep.exit_code = 1;
    rep.stderr_tail = "ValueError: broken";
    rep.details = "candidate raised";
    ev.failure = rep;
    return ev;
  }
  static const std::regex mark_re(R"(QUALITY_MARK = ([-0-9.eE]+))");
  std::smatch m;
  double q;
  if (std::regex_search(program, m, mark_re)) {
    q = std::stod(m[1].str());
  } else {
    q = -static_cast<double>((fnv1a(program) ^ static_cast<std::uint64_t>(salt_ * 1e6)) % 10000) / 10000.0;
  }
  ev.quality = q;
  education::InstanceResult r;
  r.instance_id = "stub";
  r.objective = 1.0 - q;
  r.reference = 1.0;
  r.gap_pct = -q * 100.0;
  ev.instances.push_back(r);
  return ev;
}

}  // namespace heurgen::testing
