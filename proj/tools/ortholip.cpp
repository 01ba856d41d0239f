#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ortholip/experiment.hpp"

using namespace ortholip;

int main(int argc, char** argv) {
  CLI::App app{"ortholip: orthotropic p-Laplace solver and estimate checker"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out = "out";
  std::optional<double> budget;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  auto common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--budget", budget, "budget for every implied constant");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", threads, "worker threads (ORTHOLIP_THREADS wins)");
  };

  auto* solve = app.add_subcommand("solve", "solve every instance of the config");
  common(solve, true);
  auto* verify = app.add_subcommand("verify", "solve and run the configured checkers");
  common(verify, true);
  auto* oracle = app.add_subcommand("oracle", "compare the solver with coordinate descent");
  common(oracle, true);
  auto* sweep = app.add_subcommand("sweep", "eps-continuation and refinement sweep");
  common(sweep, true);

  auto* lad = app.add_subcommand("ladder", "Moser exponent ladder in exact arithmetic");
  lad->set_help_flag("--help", "print this help message and exit");
  common(lad, false);
  std::string p = "2", h = "2", regime = "homogeneous";
  int N = 3, j_max = 10;
  lad->add_option("--p", p, "exponent p (decimal or fraction)")->capture_default_str();
  lad->add_option("--N", N, "space dimension")->capture_default_str();
  lad->add_option("--h", h, "integrability exponent of grad f")->capture_default_str();
  lad->add_option("--j-max", j_max, "last ladder index")->capture_default_str();
  lad->add_option("--regime", regime, "homogeneous or nonhomogeneous")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    CommandOptions opt;
    opt.out = out;
    opt.budget = budget;
    opt.seed = seed;
    opt.threads = resolve_threads(threads);
    if (lad->parsed()) return cmd_ladder(regime_from_string(regime), p, N, h, j_max, opt, std::cout);
    const ExperimentConfig cfg = load_config(config_path);
    if (solve->parsed()) return cmd_solve(cfg, opt, std::cout);
    if (verify->parsed()) return cmd_verify(cfg, opt, std::cout);
    if (oracle->parsed()) return cmd_oracle(cfg, opt, std::cout);
    if (sweep->parsed()) return cmd_sweep(cfg, opt, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
