#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "mecoff/errors.hpp"

using namespace mecoff::cli;

int main(int argc, char** argv) {
  CLI::App app{"Energy-optimal split of a computation task between device CPU and edge server"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run";
  std::optional<std::uint64_t> seed, episodes;
  std::optional<int> grid, nodes;
  std::optional<double> tol;
  double De = 0.0;
  bool traces = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML experiment config (defaults apply when omitted)");
    sub->add_option("--out", out_dir, "Output directory for this run");
    sub->add_option("--seed", seed, "Master RNG seed");
    sub->add_option("--grid", grid, "Data grid points of the value tables");
    sub->add_option("--nodes", nodes, "Quadrature nodes over the gain law");
    sub->add_option("--episodes", episodes, "Monte Carlo episodes");
    sub->add_option("--tol", tol, "Outer search tolerance in nats");
  };
  auto* solve = app.add_subcommand("solve", "Optimal split and baseline energies");
  auto* sweep = app.add_subcommand("sweep", "Solve every point of the config's sweep section");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of the online policy");
  auto* verify = app.add_subcommand("verify", "Convexity, oracle and simulation checks");
  for (auto* sub : {solve, sweep, simulate, verify}) add_common(sub);
  simulate->add_option("--de", De, "Offloaded amount in nats")->required();
  simulate->add_flag("--traces", traces, "Also write per-block traces.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (seed) config.numerics.seed = *seed;
    if (episodes) config.numerics.episodes = *episodes;
    if (grid) config.numerics.grid_size = *grid;
    if (nodes) config.numerics.node_count = *nodes;
    if (tol) config.numerics.tol = *tol;
    validate_config(config);

    if (*solve) return cmd_solve(config, out_dir, std::cout);
    if (*sweep) return cmd_sweep(config, out_dir, std::cout);
    if (*simulate) return cmd_simulate(config, De, traces, out_dir, std::cout);
    if (*verify) return cmd_verify(config, out_dir, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mecoff::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
