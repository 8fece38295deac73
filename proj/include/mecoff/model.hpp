#pragma once

// Deterministic physics of the offloading problem: task split, local CPU
// energy, edge compute time, fading-block geometry and Shannon transmit
// energy. All quantities are SI base units; data is measured in nats.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mecoff/errors.hpp"

namespace mecoff {

/// Offload amounts closer than this to an interval edge are treated as lying
/// on the edge. The ceiling in the block count amplifies rounding otherwise.
inline constexpr double kEdgeSlackNats = 1e-9;

struct TaskProfile {
  double deadline_T = 0.0;         // s
  double data_D = 0.0;             // nats
  double cycles_per_nat_c0 = 0.0;  // cycles / nat
  double local_cpu_cap_flU = 0.0;  // cycles / s
  double cpu_coeff_k = 0.0;        // J s^2 / cycle^3

  /// Largest amount the device can compute locally before the deadline.
  double local_capacity() const { return local_cpu_cap_flU * deadline_T / cycles_per_nat_c0; }

  friend bool operator==(const TaskProfile&, const TaskProfile&) = default;
};

struct EdgeProfile {
  double edge_cpu_fe = 0.0;  // cycles / s

  friend bool operator==(const EdgeProfile&, const EdgeProfile&) = default;
};

struct RadioProfile {
  double bandwidth_W = 0.0;   // Hz
  double block_len_Tf = 0.0;  // s

  friend bool operator==(const RadioProfile&, const RadioProfile&) = default;
};

struct TaskSplit {
  double offload_De = 0.0;
  double local_Dl = 0.0;
};

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be finite and strictly positive");
  }
}

}  // namespace detail

inline void validate(const TaskProfile& task) {
  detail::require_positive(task.deadline_T, "deadline_T");
  detail::require_positive(task.data_D, "data_D");
  detail::require_positive(task.cycles_per_nat_c0, "cycles_per_nat_c0");
  detail::require_positive(task.local_cpu_cap_flU, "local_cpu_cap_flU");
  detail::require_positive(task.cpu_coeff_k, "cpu_coeff_k");
}

inline void validate(const EdgeProfile& edge) { detail::require_positive(edge.edge_cpu_fe, "edge_cpu_fe"); }

inline void validate(const RadioProfile& radio) {
  detail::require_positive(radio.bandwidth_W, "bandwidth_W");
  detail::require_positive(radio.block_len_Tf, "block_len_Tf");
}

/// Validates all three profiles and the pairing constraint T_f <= T.
inline void validate(const TaskProfile& task, const EdgeProfile& edge, const RadioProfile& radio) {
  validate(task);
  validate(edge);
  validate(radio);
  if (radio.block_len_Tf > task.deadline_T) {
    throw DomainError("block length exceeds the task deadline");
  }
}

/// Builds a split honoring D = D_l + D_e and the local CPU cap.
inline TaskSplit make_split(double offload_De, const TaskProfile& task) {
  if (offload_De < 0.0 || offload_De > task.data_D) {
    throw DomainError("offload amount outside [0, D]");
  }
  TaskSplit split{offload_De, task.data_D - offload_De};
  if (split.local_Dl > task.local_capacity() + kEdgeSlackNats) {
    throw InfeasibleError("local share exceeds the CPU capacity within the deadline");
  }
  return split;
}

/// Energy k f_l^3 T of computing `Dl` nats locally at f_l = c0 Dl / T.
inline double local_energy(double Dl, const TaskProfile& task) {
  if (Dl < 0.0) throw DomainError("local amount must be nonnegative");
  if (Dl > task.local_capacity() + kEdgeSlackNats) {
    throw InfeasibleError("local amount exceeds f_l^U T / c0");
  }
  const double c0 = task.cycles_per_nat_c0;
  return task.cpu_coeff_k * (c0 * c0 * c0) * (Dl * Dl * Dl) / (task.deadline_T * task.deadline_T);
}

/// Time c0 De / f_e the edge server needs once all data has arrived.
inline double edge_time(double De, const TaskProfile& task, const EdgeProfile& edge) {
  if (De < 0.0) throw DomainError("offload amount must be nonnegative");
  const double te = task.cycles_per_nat_c0 * De / edge.edge_cpu_fe;
  if (te >= task.deadline_T) {
    throw InfeasibleError("edge compute time leaves no time to transmit");
  }
  return te;
}

/// Offload amount at which the remaining transmit time is exactly `blocks`
/// whole fading blocks.
inline double block_boundary(double blocks, const TaskProfile& task, const EdgeProfile& edge,
                             const RadioProfile& radio) {
  return (task.deadline_T - blocks * radio.block_len_Tf) * edge.edge_cpu_fe / task.cycles_per_nat_c0;
}

/// Number of fading blocks ceil((T - T_e) / T_f) used to offload `De`.
inline int block_count(double De, const TaskProfile& task, const EdgeProfile& edge,
                       const RadioProfile& radio) {
  const double te = edge_time(De, task, edge);
  auto blocks = static_cast<int>(std::ceil((task.deadline_T - te) / radio.block_len_Tf));
  // Snap to the lower count when De sits on (or within slack of) the
  // boundary where T - T_e is an exact multiple of T_f.
  if (blocks > 1 && std::abs(De - block_boundary(blocks - 1, task, edge, radio)) <= kEdgeSlackNats) {
    --blocks;
  }
  return blocks < 1 ? 1 : blocks;
}

/// Transmit time t_1 left in the final (possibly partial) block; in (0, T_f].
inline double last_block_time(double De, const TaskProfile& task, const EdgeProfile& edge,
                              const RadioProfile& radio) {
  const int blocks = block_count(De, task, edge, radio);
  const double te = edge_time(De, task, edge);
  double t1 = (task.deadline_T - (blocks - 1) * radio.block_len_Tf) - te;
  if (t1 > radio.block_len_Tf) t1 = radio.block_len_Tf;
  if (!(t1 > 0.0)) throw NumericError("last block duration collapsed to zero");
  return t1;
}

inline void check_channel_args(double d, double h, double t, double W) {
  if (d < 0.0) throw DomainError("data amount must be nonnegative");
  if (!(h > 0.0)) throw DomainError("channel gain must be positive");
  if (!(t > 0.0)) throw DomainError("transmit duration must be positive");
  if (!(W > 0.0)) throw DomainError("bandwidth must be positive");
}

/// Shannon power (e^{d/(tW)} - 1) / h needed to push `d` nats in time `t`.
inline double tx_power(double d, double h, double t, double W) {
  check_channel_args(d, h, t, W);
  return std::expm1(d / (t * W)) / h;
}

inline double tx_energy(double d, double h, double t, double W) { return tx_power(d, h, t, W) * t; }

struct Interval {
  int index = 0;
  double lower = 0.0;  // exclusive
  double upper = 0.0;  // inclusive
};

/// Partition of (0, T f_e / c0] into the ranges where the block count is
/// constant. Interval i holds offload amounts using i + 1 blocks.
struct IntervalPartition {
  std::vector<Interval> intervals;  // ordered by index, i.e. by decreasing De
  int i_star = 0;
  TaskProfile task;
  EdgeProfile edge;
  RadioProfile radio;

  const Interval& at(int i) const {
    if (i < 0 || i > i_star) throw DomainError("interval index out of range");
    return intervals[static_cast<std::size_t>(i)];
  }
};

inline IntervalPartition interval_partition(const TaskProfile& task, const EdgeProfile& edge,
                                            const RadioProfile& radio) {
  validate(task, edge, radio);
  IntervalPartition p;
  p.task = task;
  p.edge = edge;
  p.radio = radio;
  p.i_star = block_count(0.0, task, edge, radio) - 1;
  for (int i = 0; i <= p.i_star; ++i) {
    Interval iv;
    iv.index = i;
    iv.upper = block_boundary(i, task, edge, radio);
    iv.lower = i == p.i_star ? 0.0 : block_boundary(i + 1, task, edge, radio);
    p.intervals.push_back(iv);
  }
  return p;
}

/// Index of the interval holding `De`, i.e. block_count(De) - 1. On exact
/// boundaries the block-count formula wins over the closed-right labels.
inline int interval_of(double De, const IntervalPartition& partition) {
  const double top = partition.task.deadline_T * partition.edge.edge_cpu_fe / partition.task.cycles_per_nat_c0;
  if (!(De > 0.0) || !(De < top)) throw DomainError("offload amount outside (0, T f_e / c0)");
  return block_count(De, partition.task, partition.edge, partition.radio) - 1;
}

}  // namespace mecoff
