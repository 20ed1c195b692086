#include <iostream>

#include <CLI11.hpp>

#include "bergman/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Weighted inequality laboratory for the Bergman projection"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run the experiments of a JSON config");
  std::string config;
  std::string out_dir = ".";
  std::optional<int> depth;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config, "Experiment or suite config (JSON)")->required();
  run->add_option("--out-dir", out_dir, "Directory for CSV and JSON reports");
  run->add_option("--depth", depth, "Override the mesh depth J of every experiment");
  run->add_option("--seed", seed, "Override the seed of every experiment");
  CLI11_PARSE(app, argc, argv);

  bergman::RunOptions opts;
  opts.out_dir = out_dir;
  opts.depth = depth;
  opts.seed = seed;
  try {
    return bergman::run(config, opts, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
