#pragma once

// Backward recursion for the minimum expected transmit energy J_n(d) of
// delivering d nats over fading blocks n, n-1, ..., 1 (block 1 is the last,
// partial block of duration t1), and the per-block decision rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/csv.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/model.hpp"

namespace mecoff {

/// How the per-block minimization over d_n is carried out.
enum class InnerSolver {
  /// Exact minimum of e(d_n) + interpolated J_{n-1}(d - d_n): the objective
  /// is convex, so the optimal residual segment is found by bisection on
  /// the subgradient condition and solved in closed form inside it.
  segment_exact,
  /// Golden-section search on [0, d] to width d_max * 1e-6.
  golden_section,
  /// Residual d - d_n restricted to grid points; no interpolation.
  grid_enumeration,
};

struct ValueTable {
  std::vector<double> d_grid;
  std::vector<std::vector<double>> stage_values;  // stage_values[n - 1][j] = J_n(d_grid[j])
  double t1 = 0.0;
  RadioProfile radio;
  QuadratureRule rule;
  InnerSolver solver = InnerSolver::segment_exact;
  double inv_gain_mean = 0.0;  // E[1/h] under `rule`

  int n_max() const { return static_cast<int>(stage_values.size()); }
  double d_max() const { return d_grid.back(); }
  std::size_t grid_size() const { return d_grid.size(); }
  const std::vector<double>& stage(int n) const { return stage_values[static_cast<std::size_t>(n - 1)]; }
  double golden_tolerance() const { return d_max() * 1e-6; }
};

struct StageDecision {
  int stage = 0;
  double remaining_d = 0.0;
  double gain_h = 0.0;
  double chosen_dn = 0.0;
  double stage_energy = 0.0;  // energy spent in this block
  double value = 0.0;         // J_n(d, h): this block plus expected future
};

namespace detail {

struct Minimum {
  double dn = 0.0;
  double value = 0.0;
};

/// Energy of sending x nats in duration `t` at gain h, no argument checks.
inline double raw_energy(double x, double h, double t, double W) { return t * std::expm1(x / (t * W)) / h; }

/// Index of the last grid point <= d.
inline std::size_t floor_index(const std::vector<double>& g, double d) {
  if (d >= g.back()) return g.size() - 1;
  auto it = std::upper_bound(g.begin(), g.end(), d);
  return static_cast<std::size_t>(it - g.begin()) - 1;
}

/// Linear interpolation of v on segment j at r.
inline double segment_value(const std::vector<double>& g, const std::vector<double>& v, std::size_t j, double r) {
  if (j + 1 >= g.size() || r <= g[j]) return v[j];
  if (!std::isfinite(v[j + 1])) return r >= g[j + 1] ? v[j + 1] : kInf;
  const double frac = (r - g[j]) / (g[j + 1] - g[j]);
  return (1.0 - frac) * v[j] + frac * v[j + 1];
}

inline double interpolate(const std::vector<double>& g, const std::vector<double>& v, double r) {
  if (r <= g.front()) return v.front();
  return segment_value(g, v, floor_index(g, r), r);
}

/// Precomputed data of stage n-1 used when minimizing stage n.
struct PreviousStage {
  const std::vector<double>* grid = nullptr;
  const std::vector<double>* values = nullptr;
  std::vector<double> log_slope;  // ln of the slope of each segment (+inf beyond overflow)

  PreviousStage(const std::vector<double>& g, const std::vector<double>& v) : grid(&g), values(&v) {
    log_slope.resize(g.size() - 1);
    for (std::size_t j = 0; j + 1 < g.size(); ++j) {
      if (!std::isfinite(v[j + 1])) {
        log_slope[j] = kInf;
      } else {
        const double s = (v[j + 1] - v[j]) / (g[j + 1] - g[j]);
        log_slope[j] = s > 0.0 ? std::log(s) : -kInf;
      }
    }
  }
};

/// min over x in [0, d] of e(x, h, Tf, W) + L(d - x), L piecewise linear.
inline Minimum minimize_segment_exact(const PreviousStage& prev, double d, double h, double Tf, double W) {
  const auto& g = *prev.grid;
  const auto& L = *prev.values;
  const double scale = Tf * W;
  const double log_hw = std::log(h * W);
  const std::size_t K = floor_index(g, d);

  // Right derivative in r = d - x at r = g[j] is s_j - e'(d - g[j]); it
  // changes sign once. pred(j) <=> derivative >= 0.
  auto pred = [&](std::size_t j) {
    if (j == K && (K + 1 == g.size() || d <= g[K])) return true;
    return prev.log_slope[j] + log_hw >= (d - g[j]) / scale;
  };
  std::size_t lo = 0, hi = K + 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }

  Minimum best;
  if (lo == 0) {
    best = {d, raw_energy(d, h, Tf, W) + L[0]};
  } else {
    const std::size_t j = lo - 1;
    const double right = j == K ? d : std::min(g[j + 1], d);
    double r = d - scale * (prev.log_slope[j] + log_hw);
    r = std::clamp(r, g[j], right);
    const double x = std::max(d - r, 0.0);
    best = {x, raw_energy(x, h, Tf, W) + segment_value(g, L, j, r)};
  }
  // Corners: send everything now, or nothing now.
  const double all_now = raw_energy(d, h, Tf, W) + L[0];
  if (all_now < best.value) best = {d, all_now};
  const double none_now = interpolate(g, L, d);
  if (none_now < best.value) best = {0.0, none_now};
  return best;
}

inline Minimum minimize_golden(const PreviousStage& prev, double d, double h, double Tf, double W, double tol) {
  const auto& g = *prev.grid;
  const auto& L = *prev.values;
  auto phi = [&](double x) { return raw_energy(x, h, Tf, W) + interpolate(g, L, d - x); };
  constexpr double kInvPhi = 0.6180339887498949;
  double a = 0.0, b = d;
  double c = b - kInvPhi * (b - a), e = a + kInvPhi * (b - a);
  double fc = phi(c), fe = phi(e);
  while (b - a > tol) {
    if (fc <= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kInvPhi * (b - a);
      fc = phi(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kInvPhi * (b - a);
      fe = phi(e);
    }
  }
  const double x = 0.5 * (a + b);
  Minimum best{x, phi(x)};
  const double all_now = phi(d);
  if (all_now < best.value) best = {d, all_now};
  const double none_now = phi(0.0);
  if (none_now < best.value) best = {0.0, none_now};
  return best;
}

inline Minimum minimize_on_grid(const PreviousStage& prev, double d, double h, double Tf, double W) {
  const auto& g = *prev.grid;
  const auto& L = *prev.values;
  Minimum best{0.0, kInf};
  for (std::size_t i = 0; i < g.size() && g[i] <= d + kEdgeSlackNats; ++i) {
    const double x = std::max(d - g[i], 0.0);
    const double v = raw_energy(x, h, Tf, W) + L[i];
    if (i == 0 || v < best.value) best = {x, v};
  }
  return best;
}

inline Minimum minimize_stage(const ValueTable& table, const PreviousStage& prev, double d, double h) {
  const double Tf = table.radio.block_len_Tf;
  const double W = table.radio.bandwidth_W;
  switch (table.solver) {
    case InnerSolver::golden_section:
      return minimize_golden(prev, d, h, Tf, W, table.golden_tolerance());
    case InnerSolver::grid_enumeration:
      return minimize_on_grid(prev, d, h, Tf, W);
    case InnerSolver::segment_exact:
    default:
      return minimize_segment_exact(prev, d, h, Tf, W);
  }
}

inline void fill_tables(ValueTable& table, int n_max) {
  const auto& g = table.d_grid;
  const double W = table.radio.bandwidth_W;
  const double t1 = table.t1;
  table.inv_gain_mean = 0.0;
  for (std::size_t k = 0; k < table.rule.size(); ++k) table.inv_gain_mean += table.rule.weights[k] / table.rule.nodes[k];

  table.stage_values.assign(static_cast<std::size_t>(n_max), std::vector<double>(g.size(), 0.0));
  auto& first = table.stage_values[0];
  for (std::size_t j = 0; j < g.size(); ++j) {
    first[j] = t1 * std::expm1(g[j] / (t1 * W)) * table.inv_gain_mean;
  }
  for (int n = 2; n <= n_max; ++n) {
    const PreviousStage prev(g, table.stage(n - 1));
    auto& cur = table.stage_values[static_cast<std::size_t>(n - 1)];
    cur[0] = 0.0;
    for (std::size_t j = 1; j < g.size(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < table.rule.size(); ++k) {
        acc += table.rule.weights[k] * minimize_stage(table, prev, g[j], table.rule.nodes[k]).value;
      }
      cur[j] = acc;
    }
  }
  for (const auto& stage : table.stage_values) {
    for (double v : stage) {
      if (std::isnan(v)) throw NumericError("value table contains NaN");
    }
  }
}

}  // namespace detail

/// Value tables on an explicit grid (must start at 0 and increase strictly).
inline ValueTable build_value_tables_on_grid(std::vector<double> d_grid, double t1, int n_max,
                                             const QuadratureRule& rule, const RadioProfile& radio,
                                             InnerSolver solver = InnerSolver::segment_exact) {
  validate(radio);
  if (!(t1 > 0.0) || t1 > radio.block_len_Tf * (1.0 + 1e-12)) throw DomainError("t1 must lie in (0, T_f]");
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  if (d_grid.size() < 2 || d_grid.front() != 0.0) throw DomainError("grid must start at 0 with >= 2 points");
  for (std::size_t j = 1; j < d_grid.size(); ++j) {
    if (!(d_grid[j] > d_grid[j - 1])) throw DomainError("grid must be strictly increasing");
  }
  if (rule.size() == 0) throw NumericError("empty channel support");

  ValueTable table;
  table.d_grid = std::move(d_grid);
  table.t1 = std::min(t1, radio.block_len_Tf);
  table.radio = radio;
  table.rule = rule;
  table.solver = solver;
  detail::fill_tables(table, n_max);
  return table;
}

inline std::vector<double> uniform_grid(double d_max, int grid_size) {
  std::vector<double> g(static_cast<std::size_t>(grid_size));
  for (int j = 0; j < grid_size; ++j) g[static_cast<std::size_t>(j)] = d_max * j / (grid_size - 1);
  g.back() = d_max;
  return g;
}

/// Value tables J_1..J_{n_max} on a uniform grid over [0, d_max].
inline ValueTable build_value_tables(double d_max, double t1, int n_max, int grid_size, const QuadratureRule& rule,
                                     const RadioProfile& radio, InnerSolver solver = InnerSolver::segment_exact) {
  if (grid_size < 32) throw DomainError("grid_size must be >= 32");
  if (!(d_max > 0.0) || !std::isfinite(d_max)) throw DomainError("d_max must be positive");
  return build_value_tables_on_grid(uniform_grid(d_max, grid_size), t1, n_max, rule, radio, solver);
}

/// Piecewise-linear read of J_n(d).
inline double eval_J(const ValueTable& table, int n, double d) {
  if (n < 1 || n > table.n_max()) throw DomainError("stage index out of range");
  if (d < 0.0 || d > table.d_max() + kEdgeSlackNats) throw DomainError("data amount outside the table grid");
  return detail::interpolate(table.d_grid, table.stage(n), d);
}

/// Optimal amount to send in block n given `d` nats left and observed gain `h`.
inline StageDecision stage_decision(const ValueTable& table, int n, double d, double h) {
  if (n < 1 || n > table.n_max()) throw DomainError("stage index out of range");
  if (d < 0.0 || d > table.d_max() + kEdgeSlackNats) throw DomainError("data amount outside the table grid");
  if (!(h > 0.0)) throw DomainError("channel gain must be positive");
  const double W = table.radio.bandwidth_W;
  StageDecision out;
  out.stage = n;
  out.remaining_d = d;
  out.gain_h = h;
  if (n == 1) {
    out.chosen_dn = d;
    out.stage_energy = detail::raw_energy(d, h, table.t1, W);
    out.value = out.stage_energy;
    return out;
  }
  const detail::PreviousStage prev(table.d_grid, table.stage(n - 1));
  const auto m = detail::minimize_stage(table, prev, d, h);
  out.chosen_dn = m.dn;
  out.stage_energy = detail::raw_energy(m.dn, h, table.radio.block_len_Tf, W);
  out.value = m.value;
  return out;
}

/// Bound (step^2 / 8) * max J'' on the error of interpolating stage n at
/// spacing `step`, with J'' estimated from this table's second differences.
/// A non-positive `step` means the table's own spacing.
inline double interpolation_error_bound(const ValueTable& table, int n, double step = 0.0) {
  const auto& v = table.stage(n);
  const auto& g = table.d_grid;
  double curvature = 0.0;
  double own_step = 0.0;
  for (std::size_t j = 1; j + 1 < g.size(); ++j) {
    const double h = 0.5 * (g[j + 1] - g[j - 1]);
    own_step = std::max(own_step, g[j + 1] - g[j]);
    const double dd = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h);
    if (std::isfinite(dd)) curvature = std::max(curvature, std::abs(dd));
  }
  if (step <= 0.0) step = own_step;
  return step * step / 8.0 * curvature;
}

/// Minimum expected transmit energy J_{N(De)}(De) of offloading De nats.
inline double expected_offload_energy(double De, const TaskProfile& task, const EdgeProfile& edge,
                                      const RadioProfile& radio, const QuadratureRule& rule, int grid_size,
                                      InnerSolver solver = InnerSolver::segment_exact) {
  if (De == 0.0) return 0.0;
  if (!(De > 0.0)) throw DomainError("offload amount must be nonnegative");
  const double t1 = last_block_time(De, task, edge, radio);
  const int blocks = block_count(De, task, edge, radio);
  const ValueTable table = build_value_tables(De, t1, blocks, grid_size, rule, radio, solver);
  return table.stage(blocks).back();
}

/// Thread-safe memo of value tables keyed by (t1 rounded to 1 ns, d_max, n_max).
class TableCache {
 public:
  TableCache(RadioProfile radio, QuadratureRule rule, int grid_size,
             InnerSolver solver = InnerSolver::segment_exact)
      : radio_(radio), rule_(std::move(rule)), grid_size_(grid_size), solver_(solver) {}

  std::shared_ptr<const ValueTable> get(double d_max, double t1, int n_max) const {
    const Key key{std::llround(t1 * 1e9), d_max, n_max};
    {
      std::lock_guard lock(mutex_);
      if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    auto table = std::make_shared<const ValueTable>(
        build_value_tables(d_max, t1, n_max, grid_size_, rule_, radio_, solver_));
    std::lock_guard lock(mutex_);
    return tables_.emplace(key, std::move(table)).first->second;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return tables_.size();
  }

  const QuadratureRule& rule() const { return rule_; }
  const RadioProfile& radio() const { return radio_; }
  int grid_size() const { return grid_size_; }
  InnerSolver solver() const { return solver_; }

 private:
  using Key = std::tuple<long long, double, int>;

  RadioProfile radio_;
  QuadratureRule rule_;
  int grid_size_;
  InnerSolver solver_;
  mutable std::mutex mutex_;
  mutable std::map<Key, std::shared_ptr<const ValueTable>> tables_;
};

/// Finite instance for exhaustive evaluation: residual amounts restricted to
/// grid points, gains restricted to atoms.
struct DiscreteInstance {
  std::vector<double> d_grid;  // starts at 0, strictly increasing
  std::vector<double> gains;
  std::vector<double> probs;
  int stages = 1;
  double t1 = 0.0;
  RadioProfile radio;
};

inline constexpr std::size_t kBruteMaxGrid = 64;
inline constexpr std::size_t kBruteMaxAtoms = 8;
inline constexpr int kBruteMaxStages = 4;

/// Exact expectation-of-minimum by recursive enumeration over every block
/// decision and gain atom. Returns J_stages(d_grid[index]).
inline double brute_force_value(const DiscreteInstance& inst, std::size_t index) {
  if (inst.d_grid.size() > kBruteMaxGrid || inst.gains.size() > kBruteMaxAtoms || inst.stages > kBruteMaxStages) {
    throw SizeError("instance too large for exhaustive enumeration");
  }
  if (inst.stages < 1 || inst.gains.empty() || inst.gains.size() != inst.probs.size() || index >= inst.d_grid.size()) {
    throw DomainError("malformed discrete instance");
  }
  double total_p = 0.0;
  for (double p : inst.probs) total_p += p;

  std::map<std::pair<int, std::size_t>, double> memo;
  auto value = [&](auto&& self, int n, std::size_t j) -> double {
    if (auto it = memo.find({n, j}); it != memo.end()) return it->second;
    const double d = inst.d_grid[j];
    double acc = 0.0;
    for (std::size_t a = 0; a < inst.gains.size(); ++a) {
      const double h = inst.gains[a];
      const double p = inst.probs[a] / total_p;
      double best;
      if (n == 1) {
        best = tx_energy(d, h, inst.t1, inst.radio.bandwidth_W);
      } else {
        best = kInf;
        for (std::size_t i = 0; i <= j; ++i) {
          const double cand = tx_energy(d - inst.d_grid[i], h, inst.radio.block_len_Tf, inst.radio.bandwidth_W) +
                              self(self, n - 1, i);
          best = std::min(best, cand);
        }
      }
      acc += p * best;
    }
    memo[{n, j}] = acc;
    return acc;
  };
  return value(value, inst.stages, index);
}

/// CSV dump with columns n,d,J.
inline void write_csv(std::ostream& os, const ValueTable& table) {
  os << "n,d,J\n";
  for (int n = 1; n <= table.n_max(); ++n) {
    for (std::size_t j = 0; j < table.grid_size(); ++j) {
      os << n << ',' << format_double(table.d_grid[j]) << ',' << format_double(table.stage(n)[j]) << '\n';
    }
  }
}

}  // namespace mecoff
