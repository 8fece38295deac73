#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "mecoff/optimizer.hpp"

namespace mecoff::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitConfig = 2,
  kExitInfeasible = 3,
  kExitVerification = 4,
};

struct PropertyResult {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // >= 0 when the property holds
  std::string detail;
};

struct VerifyReport {
  std::vector<PropertyResult> properties;
  std::string stage_curves_csv;

  bool all_pass() const {
    for (const auto& p : properties) {
      if (!p.pass) return false;
    }
    return true;
  }
};

/// Interval table plus candidates and winner. Columns i,lower,upper,feasible,De_i,E_i.
std::string solution_csv(const OffloadSolution& solution);

/// Sweep CSV for the config's sweep spec; points are solved independently.
std::string sweep_csv(const ExperimentConfig& config);

VerifyReport run_verification(const ExperimentConfig& config);

/// Command entry points. Each writes config.yaml and its outputs into
/// `out_dir` (created if missing; skipped when empty) and returns an exit code.
int cmd_solve(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log);
int cmd_simulate(const ExperimentConfig& config, double De, bool traces, const std::string& out_dir, std::ostream& log);
int cmd_verify(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log);

}  // namespace mecoff::cli
