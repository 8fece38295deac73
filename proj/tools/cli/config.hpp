#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/model.hpp"
#include "mecoff/optimizer.hpp"

namespace mecoff::cli {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ChannelParams {
  double mean_mu = 100.0;
  double h_min = 0.1;
  double h_max = 5000.0;  // may be +inf

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct Numerics {
  int grid_size = 513;
  int node_count = 64;
  double tol = 0.0;  // nats; 0 means D * 1e-5
  std::uint64_t episodes = 10000;
  std::uint64_t seed = 1;

  friend bool operator==(const Numerics&, const Numerics&) = default;
};

/// Swept parameter. `fe_mu` sweeps the edge CPU over `values` for every
/// gain mean in `mu_values`.
struct SweepSpec {
  std::string param;  // D | T | Tf | fe_mu
  std::vector<double> values;
  std::vector<double> mu_values;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentConfig {
  TaskProfile task{0.02, 4e4, 40.0, 0.5e9, 1e-23};
  EdgeProfile edge{1e9};
  RadioProfile radio{1e6, 2e-3};
  ChannelParams channel;
  Numerics numerics;
  std::optional<SweepSpec> sweep;

  GainDistribution gain_distribution() const {
    return GainDistribution::truncated_exponential(channel.mean_mu, channel.h_min, channel.h_max);
  }
  PlannerSettings planner_settings() const {
    PlannerSettings s;
    s.grid_size = numerics.grid_size;
    s.node_count = numerics.node_count;
    s.tol = numerics.tol;
    return s;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses "<number> [unit]" for a quantity of the given dimension
/// ("time", "frequency", "data" or "plain") into SI base units.
double parse_quantity(const std::string& text, const std::string& dimension);

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Checks the invariants every command relies on.
void validate_config(const ExperimentConfig& config);

}  // namespace mecoff::cli
