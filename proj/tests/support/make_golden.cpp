// Regenerates the golden mock transcript by running the golden config
// against the scripted responder and keeping each reply's tag and text.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "heurgen/app/config.hpp"
#include "heurgen/app/run.hpp"
#include "responder.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: make_golden <config.json> <transcript-out> [responder-seed]\n";
    return 2;
  }
  auto cfg = heurgen::app::load_config(argv[1]);
  const auto work = fs::temp_directory_path() / "heurgen_make_golden";
  fs::remove_all(work);
  cfg.output_dir = work;
  heurgen::testing::ResponderOptions ro;
  ro.seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 11;
  ro.broken_rate = 0.2;
  heurgen::app::RunHooks hooks;
  hooks.provider = [&] { return std::make_unique<heurgen::testing::Responder>(ro); };
  auto result = heurgen::app::run(cfg, {}, hooks);

  std::ifstream in(result.dir / "transcript.jsonl");
  std::ofstream out(argv[2], std::ios::binary | std::ios::trunc);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    auto doc = nlohmann::json::parse(line);
    out << nlohmann::json{{"tag", doc.at("tag")}, {"text", doc.at("response")}}.dump() << '\n';
    ++n;
  }
  std::cout << n << " replies; summary " << result.summary.dump() << '\n';
  return 0;
}
