#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fedmm/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Federated minimax optimization: Local SGDA, FedGDA-GT and generalization bounds"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one algorithm and write its trace");
  run->add_option("config", run_config, "JSON config")->required();

  std::string compare_config;
  auto* compare = app.add_subcommand("compare", "Run several algorithms on one problem");
  compare->add_option("config", compare_config, "JSON config")->required();

  int K = 1;
  double eta = 0.0;
  long max_rounds = 1'000'000;
  auto* fixed = app.add_subcommand("fixed-point", "Local SGDA fixed point on the scalar instance");
  fixed->add_option("--K", K, "local steps")->required();
  fixed->add_option("--eta", eta, "stepsize for both players")->required();
  fixed->add_option("--max-rounds", max_rounds, "simulation round cap");

  std::string bounds_inputs;
  auto* bounds = app.add_subcommand("bounds", "Evaluate generalization bounds");
  bounds->add_option("inputs", bounds_inputs, "JSON inputs file")->required();

  std::string gen_config;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "Generate a dataset file");
  gen->add_option("config", gen_config, "JSON config")->required();
  gen->add_option("--out", gen_out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fedmm::kExitConfig;
  }

  if (*run) return fedmm::cmd_run(run_config, std::cout, std::cerr);
  if (*compare) return fedmm::cmd_compare(compare_config, std::cout, std::cerr);
  if (*fixed) return fedmm::cmd_fixed_point(K, eta, std::cout, std::cerr, max_rounds);
  if (*bounds) return fedmm::cmd_bounds(bounds_inputs, std::cout, std::cerr);
  if (*gen) return fedmm::cmd_gen_data(gen_config, gen_out, std::cout, std::cerr);
  return fedmm::kExitFailure;
}
