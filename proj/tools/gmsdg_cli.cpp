#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "gmsdg/config.hpp"
#include "gmsdg/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Adaptive generalized multiscale DG solver for high-contrast flow"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write its artifacts");
  run_cmd->add_option("config", run_config, "Config file (key=value lines)")->required();

  std::vector<std::string> compare_configs;
  auto* compare_cmd =
      app.add_subcommand("compare", "Run several strategies on one problem, merged CSV out");
  compare_cmd->add_option("configs", compare_configs, "Config files sharing grid/kappa/f/g")
      ->expected(-1)
      ->required();

  std::string gen_config, gen_out;
  auto* gen_cmd = app.add_subcommand("gen-kappa", "Generate a permeability field file");
  gen_cmd->add_option("spec", gen_config, "Config file with grid.* and kappa.* keys")
      ->required();
  gen_cmd->add_option("out", gen_out, "Output path (.bin selects the binary format)")
      ->required();

  std::string diag_config;
  auto* diag_cmd = app.add_subcommand(
      "diag-eigs", "Largest family-1 eigenvalue per block, with and without oversampling");
  diag_cmd->add_option("config", diag_config, "Config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return gmsdg::run_experiment(gmsdg::parse_config_file(run_config));
    if (compare_cmd->parsed()) {
      std::vector<gmsdg::RunConfig> cfgs;
      cfgs.reserve(compare_configs.size());
      for (const auto& path : compare_configs)
        cfgs.push_back(gmsdg::parse_config_file(path));
      return gmsdg::compare_experiments(cfgs);
    }
    if (gen_cmd->parsed())
      return gmsdg::generate_kappa(gmsdg::parse_config_file(gen_config), gen_out);
    if (diag_cmd->parsed()) return gmsdg::diag_eigs(gmsdg::parse_config_file(diag_config));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
