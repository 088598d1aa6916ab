#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dklab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo verification lab for the non-interacting Dean-Kawasaki equation"};
  app.require_subcommand(1);

  std::string config_path;
  unsigned threads = 1;
  std::string output_dir = ".";
  auto* run = app.add_subcommand("run", "run every experiment in a config file");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--threads", threads, "worker threads (0 = all cores); results do not depend on it")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--output", output_dir, "directory for CSV output");
  auto* selftest = app.add_subcommand("selftest", "run the built-in edge-case checks");

  CLI11_PARSE(app, argc, argv);

  if (*selftest) return dklab::run_selftest(std::cout) == 0 ? 0 : 1;

  try {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "dk-lab: cannot read " << config_path << '\n';
      return 2;
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto configs = dklab::parse_config_file(text.str());
    int status = 0;
    for (auto& cfg : configs) {
      dklab::apply_environment(cfg);
      const auto result = dklab::run_experiment(cfg, {threads, output_dir}, std::cout);
      for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
      status = std::max(status, dklab::exit_status(result));
    }
    return status;
  } catch (const std::exception& e) {
    std::cerr << "dk-lab: " << e.what() << '\n';
    return 2;
  }
}
