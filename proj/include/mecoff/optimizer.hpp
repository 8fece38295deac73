#pragma once

// Outer problem: choose the offloaded amount De minimizing
// J_{N(De)}(De) + E_l(D - De). The objective is convex on each range of
// constant block count, so one golden-section search per range plus the
// two corners gives the global minimum.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/dp.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/model.hpp"

namespace mecoff {

struct PlannerSettings {
  int grid_size = 513;
  int node_count = 64;
  double tol = 0.0;  // nats; non-positive means D * 1e-5
  InnerSolver solver = InnerSolver::segment_exact;
};

struct IntervalSolution {
  int index = 0;
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = false;
  double De = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();
};

struct Candidate {
  std::string name;
  bool feasible = false;
  double De = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();
};

struct OffloadSolution {
  double best_De = 0.0;
  double best_Dl = 0.0;
  double best_energy = 0.0;
  std::vector<IntervalSolution> per_interval;
  std::vector<Candidate> candidates;  // all-local, all-offload
};

enum class BaselineKind { full_offload, full_local, binary };

inline const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::full_offload:
      return "full-offload";
    case BaselineKind::full_local:
      return "full-local";
    case BaselineKind::binary:
    default:
      return "binary";
  }
}

/// Holds one problem instance together with its quadrature rule and a memo
/// of value tables. Immutable after construction apart from the memo.
class Planner {
 public:
  Planner(TaskProfile task, EdgeProfile edge, RadioProfile radio, GainDistribution channel,
          PlannerSettings settings = {})
      : task_(task),
        edge_(edge),
        radio_(radio),
        channel_(channel),
        settings_(settings),
        partition_(interval_partition(task, edge, radio)),
        cache_(radio, build_quadrature(channel, settings.node_count), settings.grid_size, settings.solver) {
    if (settings_.tol <= 0.0) settings_.tol = task_.data_D * 1e-5;
  }

  const TaskProfile& task() const { return task_; }
  const EdgeProfile& edge() const { return edge_; }
  const RadioProfile& radio() const { return radio_; }
  const GainDistribution& channel() const { return channel_; }
  const PlannerSettings& settings() const { return settings_; }
  const IntervalPartition& partition() const { return partition_; }
  const QuadratureRule& rule() const { return cache_.rule(); }
  double tol() const { return settings_.tol; }

  /// Offload amounts strictly below this cannot be offloaded in time.
  double offload_limit() const { return task_.deadline_T * edge_.edge_cpu_fe / task_.cycles_per_nat_c0; }
  /// Smallest De that keeps the local share within the CPU cap.
  double min_offload() const { return std::max(0.0, task_.data_D - task_.local_capacity()); }
  bool all_local_feasible() const { return task_.data_D <= task_.local_capacity() + kEdgeSlackNats; }

  /// Tables for offloading De nats (d_max = De, n_max = N(De)).
  std::shared_ptr<const ValueTable> tables_for(double De) const {
    if (!(De > 0.0)) throw DomainError("tables_for requires De > 0");
    const int blocks = block_count(De, task_, edge_, radio_);
    return cache_.get(De, last_block_time(De, task_, edge_, radio_), blocks);
  }

  /// J_{N(De)}(De); zero for De = 0.
  double offload_energy(double De) const {
    if (De == 0.0) return 0.0;
    if (!(De > 0.0) || !(De < offload_limit())) throw InfeasibleError("offload amount leaves no transmit time");
    const auto table = tables_for(De);
    return table->stage(table->n_max()).back();
  }

  /// Total expected energy F(De) = J_{N(De)}(De) + E_l(D - De).
  double objective(double De) const {
    if (De < min_offload() - kEdgeSlackNats || De > task_.data_D || De < 0.0) {
      throw InfeasibleError("offload amount outside the feasible split range");
    }
    const double local = std::max(task_.data_D - De, 0.0);
    return offload_energy(De) + local_energy(std::min(local, task_.local_capacity()), task_);
  }

  /// Minimum of the objective over interval i intersected with the feasible
  /// split range, by golden-section search to width tol. Both ends of the
  /// intersection are evaluated as candidates.
  IntervalSolution solve_interval(int i) const {
    const Interval& iv = partition_.at(i);
    IntervalSolution out;
    out.index = i;
    out.lower = iv.lower;
    out.upper = iv.upper;

    double a = std::max(iv.lower, min_offload());
    double b = std::min(iv.upper, task_.data_D);
    if (b >= offload_limit()) b = offload_limit() - tol();
    if (a > b) return out;

    out.feasible = true;
    auto consider = [&](double De, double value) {
      if (std::isnan(out.energy) || value < out.energy) {
        out.De = De;
        out.energy = value;
      }
    };
    consider(a, objective(a));
    if (b > a) consider(b, objective(b));

    constexpr double kInvPhi = 0.6180339887498949;
    double lo = a, hi = b;
    double c = hi - kInvPhi * (hi - lo), e = lo + kInvPhi * (hi - lo);
    double fc = objective(c), fe = objective(e);
    while (hi - lo > tol()) {
      if (fc <= fe) {
        hi = e;
        e = c;
        fe = fc;
        c = hi - kInvPhi * (hi - lo);
        fc = objective(c);
      } else {
        lo = c;
        c = e;
        fc = fe;
        e = lo + kInvPhi * (hi - lo);
        fe = objective(e);
      }
    }
    consider(c, fc);
    consider(e, fe);
    return out;
  }

  OffloadSolution solve() const {
    OffloadSolution sol;
    bool found = false;
    auto take = [&](double De, double energy) {
      if (!found || energy < sol.best_energy) {
        found = true;
        sol.best_De = De;
        sol.best_energy = energy;
      }
    };

    Candidate local{"all-local"};
    if (all_local_feasible()) {
      local.feasible = true;
      local.De = 0.0;
      local.energy = objective(0.0);
      take(local.De, local.energy);
    }
    Candidate offload{"all-offload"};
    if (task_.data_D < offload_limit()) {
      offload.feasible = true;
      offload.De = task_.data_D;
      offload.energy = objective(task_.data_D);
      take(offload.De, offload.energy);
    }
    sol.candidates = {local, offload};

    for (int i = 0; i <= partition_.i_star; ++i) {
      sol.per_interval.push_back(solve_interval(i));
      const auto& r = sol.per_interval.back();
      if (r.feasible) take(r.De, r.energy);
    }
    if (!found) throw InfeasibleError("no feasible split: local capacity and edge deadline both exceeded");
    sol.best_Dl = task_.data_D - sol.best_De;
    return sol;
  }

  std::optional<double> baseline_energy(BaselineKind kind) const {
    std::optional<double> offload, local;
    if (task_.data_D < offload_limit()) offload = objective(task_.data_D);
    if (all_local_feasible()) local = local_energy(std::min(task_.data_D, task_.local_capacity()), task_);
    switch (kind) {
      case BaselineKind::full_offload:
        return offload;
      case BaselineKind::full_local:
        return local;
      case BaselineKind::binary:
      default:
        if (offload && local) return std::min(*offload, *local);
        return offload ? offload : local;
    }
  }

 private:
  TaskProfile task_;
  EdgeProfile edge_;
  RadioProfile radio_;
  GainDistribution channel_;
  PlannerSettings settings_;
  IntervalPartition partition_;
  TableCache cache_;
};

inline double objective(double De, const TaskProfile& task, const EdgeProfile& edge, const RadioProfile& radio,
                        const GainDistribution& channel, const PlannerSettings& settings = {}) {
  return Planner(task, edge, radio, channel, settings).objective(De);
}

inline OffloadSolution solve(const TaskProfile& task, const EdgeProfile& edge, const RadioProfile& radio,
                             const GainDistribution& channel, const PlannerSettings& settings = {}) {
  return Planner(task, edge, radio, channel, settings).solve();
}

inline std::optional<double> baseline_energy(BaselineKind kind, const TaskProfile& task, const EdgeProfile& edge,
                                             const RadioProfile& radio, const GainDistribution& channel,
                                             const PlannerSettings& settings = {}) {
  return Planner(task, edge, radio, channel, settings).baseline_energy(kind);
}

}  // namespace mecoff
