#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mecoff/mecoff.hpp"
#include "mecoff/parallel.hpp"

namespace mecoff::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kConvexityTol = 1e-9;

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : "infeasible"; }

/// Copy of `config` with one swept parameter replaced. The gain truncation
/// keeps its ratio to the mean when the mean changes.
ExperimentConfig with_point(const ExperimentConfig& config, const std::string& param, double value, double mu) {
  ExperimentConfig c = config;
  if (param == "D") c.task.data_D = value;
  if (param == "T") c.task.deadline_T = value;
  if (param == "Tf") c.radio.block_len_Tf = value;
  if (param == "fe_mu") {
    c.edge.edge_cpu_fe = value;
    const double scale = mu / config.channel.mean_mu;
    c.channel.mean_mu = mu;
    c.channel.h_min = config.channel.h_min * scale;
    c.channel.h_max = config.channel.h_max * scale;
  }
  return c;
}

Planner make_planner(const ExperimentConfig& c) {
  return Planner(c.task, c.edge, c.radio, c.gain_distribution(), c.planner_settings());
}

/// Minimum of second differences normalized by max |v|, over index runs
/// accepted by `same_piece`.
template <typename SamePiece>
double min_normalized_second_difference(const std::vector<double>& v, SamePiece same_piece) {
  double scale = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) scale = std::max(scale, std::abs(x));
  }
  if (scale == 0.0) scale = 1.0;
  double worst = kInf;
  for (std::size_t j = 1; j + 1 < v.size(); ++j) {
    if (!same_piece(j)) continue;
    if (!std::isfinite(v[j + 1])) continue;
    worst = std::min(worst, (v[j + 1] - 2.0 * v[j] + v[j - 1]) / scale);
  }
  return worst;
}

PropertyResult check_stage_convexity(const Planner& planner) {
  PropertyResult r{"stage_convexity", false, 0.0, {}};
  const auto& task = planner.task();
  const auto& radio = planner.radio();
  const int stages = planner.partition().i_star + 1;
  double worst = kInf;
  for (double frac : {0.2, 0.5, 1.0}) {
    const double t1 = frac * radio.block_len_Tf;
    const auto table = build_value_tables(task.data_D, t1, stages, planner.settings().grid_size, planner.rule(), radio);
    for (int n = 1; n <= stages; ++n) {
      worst = std::min(worst, min_normalized_second_difference(table.stage(n), [](std::size_t) { return true; }));
    }
  }
  r.margin = worst + kConvexityTol;
  r.pass = r.margin >= 0.0;
  r.detail = "min second difference / max|J_n| over n=1.." + std::to_string(stages) + ", t1 in {0.2,0.5,1}*Tf";
  return r;
}

std::vector<PropertyResult> check_monotone_and_anchor(const Planner& planner) {
  const auto& radio = planner.radio();
  const int stages = planner.partition().i_star + 1;
  PropertyResult mono{"monotonicity_and_zero_law", false, 0.0, {}};
  PropertyResult anchor{"stage1_closed_form", false, 0.0, {}};
  double mono_margin = kInf, anchor_gap = 0.0;
  bool zero_ok = true;
  for (double frac : {0.2, 0.5, 1.0}) {
    const double t1 = frac * radio.block_len_Tf;
    const auto table =
        build_value_tables(planner.task().data_D, t1, stages, planner.settings().grid_size, planner.rule(), radio);
    const double inv_mean = expect(planner.rule(), [](double h) { return 1.0 / h; });
    for (int n = 1; n <= stages; ++n) {
      const auto& v = table.stage(n);
      zero_ok = zero_ok && v[0] == 0.0;
      for (std::size_t j = 1; j < v.size(); ++j) {
        if (std::isfinite(v[j])) mono_margin = std::min(mono_margin, (v[j] - v[j - 1]) + 1e-12 * std::abs(v[j]));
        if (n > 1 && std::isfinite(table.stage(n - 1)[j])) {
          const double up = table.stage(n - 1)[j];
          mono_margin = std::min(mono_margin, up + 1e-12 * (1.0 + std::abs(up)) - v[j]);
        }
      }
    }
    for (std::size_t j = 1; j < table.grid_size(); ++j) {
      const double closed = t1 * std::expm1(table.d_grid[j] / (t1 * radio.bandwidth_W)) * inv_mean;
      if (std::isfinite(closed)) anchor_gap = std::max(anchor_gap, std::abs(table.stage(1)[j] - closed) / closed);
    }
  }
  mono.margin = zero_ok ? mono_margin : -1.0;
  mono.pass = mono.margin >= 0.0;
  mono.detail = "J_n nondecreasing in d, J_{n+1} <= J_n, J_n(0) = 0";
  anchor.margin = 1e-10 - anchor_gap;
  anchor.pass = anchor.margin >= 0.0;
  anchor.detail = "max relative gap of stage 1 to t1 (e^{d/(t1 W)} - 1) E[1/h]";
  return {mono, anchor};
}

PropertyResult check_oracle(const ExperimentConfig& config) {
  PropertyResult r{"oracle_equivalence", false, 0.0, {}};
  CounterRng rng(config.numerics.seed ^ 0x5eedULL);
  double worst = 0.0;
  constexpr int kInstances = 20;
  for (int k = 0; k < kInstances; ++k) {
    DiscreteInstance inst;
    inst.radio = config.radio;
    const auto points = 2 + static_cast<std::size_t>(rng.uniform() * 63);  // 2..64
    const auto atoms = 1 + static_cast<std::size_t>(rng.uniform() * 8);    // 1..8
    inst.stages = 1 + static_cast<int>(rng.uniform() * 4);                 // 1..4
    inst.t1 = config.radio.block_len_Tf * (0.05 + 0.95 * rng.uniform());
    const double d_max = (0.2 + 2.8 * rng.uniform()) * inst.t1 * config.radio.bandwidth_W;
    inst.d_grid = uniform_grid(d_max, static_cast<int>(points));
    for (std::size_t a = 0; a < atoms; ++a) {
      inst.gains.push_back(config.channel.mean_mu * (0.05 + 3.0 * rng.uniform()));
      inst.probs.push_back(0.1 + rng.uniform());
    }
    const auto table = build_value_tables_on_grid(inst.d_grid, inst.t1, inst.stages,
                                                  QuadratureRule::atoms(inst.gains, inst.probs), inst.radio,
                                                  InnerSolver::grid_enumeration);
    for (std::size_t j = 1; j < inst.d_grid.size(); ++j) {
      const double oracle = brute_force_value(inst, j);
      const double dp = table.stage(inst.stages)[j];
      worst = std::max(worst, std::abs(dp - oracle) / std::abs(oracle));
    }
  }
  r.margin = 1e-12 - worst;
  r.pass = r.margin >= 0.0;
  r.detail = std::to_string(kInstances) + " random instances, max relative gap to exhaustive enumeration";
  return r;
}

struct Curve {
  std::vector<double> De, value;
  std::vector<int> interval;
  double step = 0.0;
};

Curve offload_curve(const Planner& planner) {
  Curve c;
  constexpr int kSamples = 400;
  const double top = std::min(2.5 * planner.task().data_D, planner.offload_limit() * (1.0 - 1e-6));
  c.step = top / kSamples;
  c.De.resize(kSamples);
  c.value.resize(kSamples);
  c.interval.resize(kSamples);
  parallel_for(kSamples, [&](std::size_t k) {
    const double De = top * static_cast<double>(k + 1) / kSamples;
    c.De[k] = De;
    c.value[k] = planner.offload_energy(De);
    c.interval[k] = interval_of(De, planner.partition());
  });
  return c;
}

std::vector<PropertyResult> check_offload_curve(const Planner& planner, const Curve& c) {
  PropertyResult convex{"offload_curve_convexity", false, 0.0, {}};
  const double worst = min_normalized_second_difference(
      c.value, [&](std::size_t j) { return c.interval[j - 1] == c.interval[j] && c.interval[j] == c.interval[j + 1]; });
  convex.margin = worst + kConvexityTol;
  convex.pass = convex.margin >= 0.0;
  convex.detail = "min second difference / max|J| within each block-count interval, 400 samples";

  PropertyResult kinks{"offload_curve_breakpoints", false, 0.0, {}};
  double scale = 0.0;
  for (double v : c.value) scale = std::max(scale, std::abs(v));
  std::vector<double> detected;
  for (std::size_t j = 1; j + 1 < c.value.size(); ++j) {
    if (c.value[j + 1] - 2.0 * c.value[j] + c.value[j - 1] < -kConvexityTol * scale) detected.push_back(c.De[j]);
  }
  std::vector<double> boundaries;
  for (const auto& iv : planner.partition().intervals) {
    if (iv.upper > c.De.front() && iv.upper <= c.De.back() * (1.0 + 1e-12)) boundaries.push_back(iv.upper);
  }
  double margin = kInf;
  for (double x : detected) {
    double nearest = kInf;
    for (double b : boundaries) nearest = std::min(nearest, std::abs(x - b));
    margin = std::min(margin, c.step * (1.0 + 1e-9) - nearest);
  }
  for (double b : boundaries) {
    double nearest = kInf;
    for (double x : detected) nearest = std::min(nearest, std::abs(x - b));
    margin = std::min(margin, c.step * (1.0 + 1e-9) - nearest);
  }
  kinks.margin = std::isfinite(margin) ? margin : 0.0;
  kinks.pass = kinks.margin >= 0.0;
  kinks.detail = std::to_string(detected.size()) + " kinks vs " + std::to_string(boundaries.size()) +
                 " interval boundaries, tolerance one sample step";
  return {convex, kinks};
}

PropertyResult check_dp_vs_mc(const ExperimentConfig& config, const Planner& planner) {
  PropertyResult r{"dp_monte_carlo_agreement", false, 0.0, {}};
  const double D = planner.task().data_D;
  double margin = kInf;
  std::ostringstream detail;
  for (double De : {0.25 * D, 0.5 * D, D}) {
    if (!(De < planner.offload_limit())) continue;
    const double dp = planner.offload_energy(De);
    const auto mc = monte_carlo(De, config.numerics.episodes, planner, config.numerics.seed);
    margin = std::min(margin, 3.0 * mc.std_error + 1e-6 * dp - std::abs(mc.mean_energy - dp));
    detail << "De=" << format_double(De) << " dp=" << format_double(dp) << " mc=" << format_double(mc.mean_energy)
           << "+-" << format_double(mc.std_error) << "; ";
  }
  r.margin = std::isfinite(margin) ? margin : 0.0;
  r.pass = r.margin >= 0.0;
  r.detail = detail.str();
  return r;
}

PropertyResult check_policy_consistency(const Planner& planner) {
  PropertyResult r{"policy_consistency", false, 0.0, {}};
  const auto table = planner.tables_for(planner.task().data_D);
  double worst = 0.0;
  for (int n = 1; n <= table->n_max(); ++n) {
    for (std::size_t j : {table->grid_size() / 4, table->grid_size() / 2, table->grid_size() - 1}) {
      const double d = table->d_grid[j];
      const double via_policy = expect(planner.rule(), [&](double h) { return stage_decision(*table, n, d, h).value; });
      const double stored = table->stage(n)[j];
      if (stored > 0.0) worst = std::max(worst, std::abs(via_policy - stored) / stored);
    }
  }
  r.margin = 1e-6 - worst;
  r.pass = r.margin >= 0.0;
  r.detail = "E_h[e(d_n*) + J_{n-1}(d - d_n*)] vs J_n(d)";
  return r;
}

std::string stage_curves_csv(const Planner& planner, const Curve& c) {
  const double h = planner.channel().mean_mu();
  const double t1 = last_block_time(planner.task().data_D, planner.task(), planner.edge(), planner.radio());
  const int fixed_stages = 5;
  const auto fixed = build_value_tables(c.De.back(), t1, fixed_stages, planner.settings().grid_size, planner.rule(),
                                        planner.radio());
  std::ostringstream os;
  os << "De,N,t1,J_N,J_N_h,J_4,J_4_h,J_5,J_5_h\n";
  for (std::size_t k = 0; k < c.De.size(); ++k) {
    const double De = c.De[k];
    const auto table = planner.tables_for(De);
    const int N = table->n_max();
    os << format_double(De) << ',' << N << ',' << format_double(table->t1) << ',' << format_double(c.value[k]) << ','
       << format_double(stage_decision(*table, N, De, h).value);
    for (int n : {4, 5}) {
      os << ',' << format_double(eval_J(fixed, n, De)) << ',' << format_double(stage_decision(fixed, n, De, h).value);
    }
    os << '\n';
  }
  return os.str();
}

json property_json(const PropertyResult& p) {
  return json{{"name", p.name}, {"pass", p.pass}, {"margin", p.margin}, {"detail", p.detail}};
}

}  // namespace

std::string solution_csv(const OffloadSolution& s) {
  std::ostringstream os;
  os << "i,lower,upper,feasible,De_i,E_i\n";
  for (const auto& r : s.per_interval) {
    os << r.index << ',' << format_double(r.lower) << ',' << format_double(r.upper) << ',' << (r.feasible ? 1 : 0)
       << ',' << (r.feasible ? format_double(r.De) : "") << ',' << (r.feasible ? format_double(r.energy) : "")
       << '\n';
  }
  for (const auto& cand : s.candidates) {
    os << cand.name << ",,," << (cand.feasible ? 1 : 0) << ',' << (cand.feasible ? format_double(cand.De) : "")
       << ',' << (cand.feasible ? format_double(cand.energy) : "") << '\n';
  }
  os << "best,,,1," << format_double(s.best_De) << ',' << format_double(s.best_energy) << '\n';
  return os.str();
}

std::string sweep_csv(const ExperimentConfig& config) {
  if (!config.sweep) throw ConfigError("config has no sweep section");
  const SweepSpec& spec = *config.sweep;
  struct Point {
    double value = 0.0, mu = 0.0;
  };
  std::vector<Point> points;
  if (spec.param == "fe_mu") {
    for (double mu : spec.mu_values) {
      for (double fe : spec.values) points.push_back({fe, mu});
    }
  } else {
    for (double v : spec.values) points.push_back({v, config.channel.mean_mu});
  }

  std::vector<std::string> rows(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    const auto& pt = points[k];
    const ExperimentConfig c = with_point(config, spec.param, pt.value, pt.mu);
    std::ostringstream row;
    std::optional<double> best, best_De, offload, binary;
    try {
      validate_config(c);
      const Planner planner = make_planner(c);
      try {
        const auto sol = planner.solve();
        best = sol.best_energy;
        best_De = sol.best_De;
      } catch (const InfeasibleError&) {
      }
      offload = planner.baseline_energy(BaselineKind::full_offload);
      binary = planner.baseline_energy(BaselineKind::binary);
    } catch (const ConfigError&) {
    }
    if (spec.param == "fe_mu") {
      row << format_double(pt.value) << ',' << format_double(pt.mu) << ',' << cell(best_De) << ',' << cell(best);
    } else {
      row << format_double(pt.value) << ',' << cell(best) << ',' << cell(offload) << ',' << cell(binary) << ','
          << cell(best_De);
    }
    rows[k] = row.str();
  });

  std::ostringstream os;
  if (spec.param == "fe_mu") {
    os << "fe,mu,best_De,proposed_energy\n";
  } else {
    os << spec.param << ",proposed_energy,full_offload_energy,binary_energy,best_De\n";
  }
  for (const auto& r : rows) os << r << '\n';
  return os.str();
}

VerifyReport run_verification(const ExperimentConfig& config) {
  const Planner planner = make_planner(config);
  VerifyReport report;
  report.properties.push_back(check_stage_convexity(planner));
  for (auto& p : check_monotone_and_anchor(planner)) report.properties.push_back(std::move(p));
  report.properties.push_back(check_oracle(config));
  const Curve curve = offload_curve(planner);
  for (auto& p : check_offload_curve(planner, curve)) report.properties.push_back(std::move(p));
  report.properties.push_back(check_policy_consistency(planner));
  report.properties.push_back(check_dp_vs_mc(config, planner));
  report.stage_curves_csv = stage_curves_csv(planner, curve);
  return report;
}

int cmd_solve(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log) {
  const Planner planner = make_planner(config);
  const auto sol = planner.solve();
  json report{{"best_De", sol.best_De}, {"best_Dl", sol.best_Dl}, {"best_energy", sol.best_energy}};
  for (auto kind : {BaselineKind::full_offload, BaselineKind::full_local, BaselineKind::binary}) {
    const auto v = planner.baseline_energy(kind);
    report["baselines"][to_string(kind)] = v ? json(*v) : json("infeasible");
  }
  write_file(out_dir, "config.yaml", serialize_config(config));
  write_file(out_dir, "solution.csv", solution_csv(sol));
  write_file(out_dir, "solution.json", report.dump(2) + "\n");
  log << "best De = " << format_double(sol.best_De) << " nats, Dl = " << format_double(sol.best_Dl)
      << " nats, expected energy = " << format_double(sol.best_energy) << " J\n";
  for (auto kind : {BaselineKind::full_offload, BaselineKind::full_local, BaselineKind::binary}) {
    log << to_string(kind) << ": " << cell(planner.baseline_energy(kind)) << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log) {
  const std::string csv = sweep_csv(config);
  write_file(out_dir, "config.yaml", serialize_config(config));
  write_file(out_dir, "sweep.csv", csv);
  log << csv;
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& config, double De, bool traces, const std::string& out_dir,
                 std::ostream& log) {
  const Planner planner = make_planner(config);
  if (De < 0.0 || (De > 0.0 && !(De < planner.offload_limit()))) {
    throw InfeasibleError("offload amount leaves no transmit time");
  }
  const double dp = planner.offload_energy(De);
  const auto mc = monte_carlo(De, config.numerics.episodes, planner, config.numerics.seed);
  const double allowed = 3.0 * mc.std_error + 1e-6 * dp;
  const bool agree = std::abs(mc.mean_energy - dp) <= allowed;
  json report{{"De", De},
              {"dp_value", dp},
              {"mc_mean", mc.mean_energy},
              {"std_error", mc.std_error},
              {"episodes", mc.episode_count},
              {"seed", mc.seed},
              {"allowed_gap", allowed},
              {"agreement", agree ? "pass" : "fail"}};
  write_file(out_dir, "config.yaml", serialize_config(config));
  write_file(out_dir, "simulate.json", report.dump(2) + "\n");
  if (traces && De > 0.0) {
    std::ostringstream os;
    const BlockPlan plan = block_plan(De, planner.task(), planner.edge(), planner.radio());
    const auto tables = planner.tables_for(De);
    const CounterRng root(config.numerics.seed);
    for (std::size_t i = 0; i < mc.episode_count; ++i) {
      CounterRng rng = root.split(i);
      write_trace_csv(os, i, run_episode(De, plan, *tables, planner.channel(), rng), i == 0);
    }
    write_file(out_dir, "traces.csv", os.str());
  }
  log << "De = " << format_double(De) << " nats: DP " << format_double(dp) << " J, Monte Carlo "
      << format_double(mc.mean_energy) << " +- " << format_double(mc.std_error) << " J -> "
      << (agree ? "pass" : "fail") << '\n';
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& config, const std::string& out_dir, std::ostream& log) {
  const VerifyReport report = run_verification(config);
  json j{{"all_pass", report.all_pass()}, {"properties", json::array()}};
  for (const auto& p : report.properties) {
    j["properties"].push_back(property_json(p));
    log << (p.pass ? "PASS " : "FAIL ") << p.name << "  margin=" << format_double(p.margin) << "  " << p.detail
        << '\n';
  }
  write_file(out_dir, "config.yaml", serialize_config(config));
  write_file(out_dir, "verify.json", j.dump(2) + "\n");
  write_file(out_dir, "stage_curves.csv", report.stage_curves_csv);
  return report.all_pass() ? kExitOk : kExitVerification;
}

}  // namespace mecoff::cli
