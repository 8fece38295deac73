#pragma once

// Online execution of the block-by-block policy over random fading draws,
// and Monte Carlo estimation of its expected energy.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "mecoff/channel.hpp"
#include "mecoff/csv.hpp"
#include "mecoff/dp.hpp"
#include "mecoff/errors.hpp"
#include "mecoff/model.hpp"
#include "mecoff/optimizer.hpp"
#include "mecoff/parallel.hpp"
#include "mecoff/rng.hpp"

namespace mecoff {

/// Block count and last-block duration of one offload amount.
struct BlockPlan {
  int blocks = 0;
  double t1 = 0.0;
};

inline BlockPlan block_plan(double De, const TaskProfile& task, const EdgeProfile& edge, const RadioProfile& radio) {
  if (De == 0.0) return {0, 0.0};
  return {block_count(De, task, edge, radio), last_block_time(De, task, edge, radio)};
}

struct BlockRecord {
  int n = 0;  // counts down to 1
  double h = 0.0;
  double dn = 0.0;
  double duration = 0.0;
  double energy = 0.0;
};

struct EpisodeTrace {
  double De = 0.0;
  std::vector<BlockRecord> blocks;
  double total_energy = 0.0;
};

struct MCResult {
  std::size_t episode_count = 0;
  double mean_energy = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
};

/// One gain per block, index 0 is block N.
inline std::vector<double> draw_gains(int blocks, const GainDistribution& channel, CounterRng& rng) {
  std::vector<double> gains(static_cast<std::size_t>(blocks));
  for (auto& h : gains) h = channel.sample(rng);
  return gains;
}

/// Runs the optimal policy on given gains.
inline EpisodeTrace run_episode_with_gains(double De, const BlockPlan& plan, const ValueTable& tables,
                                           const std::vector<double>& gains) {
  EpisodeTrace trace;
  trace.De = De;
  if (De == 0.0) return trace;
  if (plan.blocks < 1 || tables.n_max() < plan.blocks || De > tables.d_max() + kEdgeSlackNats ||
      std::abs(tables.t1 - plan.t1) > 1e-9) {
    throw ConsistencyError("value tables were not built for this offload amount");
  }
  if (gains.size() != static_cast<std::size_t>(plan.blocks)) throw ConsistencyError("one gain per block required");

  double remaining = De;
  for (int n = plan.blocks; n >= 1; --n) {
    const double h = gains[static_cast<std::size_t>(plan.blocks - n)];
    BlockRecord rec{n, h, 0.0, n == 1 ? plan.t1 : tables.radio.block_len_Tf, 0.0};
    if (n == 1) {
      rec.dn = remaining;
    } else {
      rec.dn = std::min(stage_decision(tables, n, std::min(remaining, tables.d_max()), h).chosen_dn, remaining);
    }
    rec.energy = tx_energy(rec.dn, h, rec.duration, tables.radio.bandwidth_W);
    remaining -= rec.dn;
    trace.total_energy += rec.energy;
    trace.blocks.push_back(rec);
  }
  return trace;
}

inline EpisodeTrace run_episode(double De, const BlockPlan& plan, const ValueTable& tables,
                                const GainDistribution& channel, CounterRng& rng) {
  return run_episode_with_gains(De, plan, tables, draw_gains(plan.blocks, channel, rng));
}

/// Heuristic that sends De / N nats in every block.
inline EpisodeTrace run_equal_split(double De, const BlockPlan& plan, const RadioProfile& radio,
                                    const std::vector<double>& gains) {
  EpisodeTrace trace;
  trace.De = De;
  if (De == 0.0) return trace;
  const double share = De / plan.blocks;
  double remaining = De;
  for (int n = plan.blocks; n >= 1; --n) {
    const double h = gains[static_cast<std::size_t>(plan.blocks - n)];
    BlockRecord rec{n, h, n == 1 ? remaining : share, n == 1 ? plan.t1 : radio.block_len_Tf, 0.0};
    rec.energy = tx_energy(rec.dn, h, rec.duration, radio.bandwidth_W);
    remaining -= rec.dn;
    trace.total_energy += rec.energy;
    trace.blocks.push_back(rec);
  }
  return trace;
}

namespace detail {

/// Mean and standard error; shifting by the first sample keeps identical
/// samples at exactly zero spread.
inline MCResult summarize(const std::vector<double>& samples, std::uint64_t seed) {
  MCResult r;
  r.seed = seed;
  r.episode_count = samples.size();
  if (samples.empty()) return r;
  const double shift = samples.front();
  double sum = 0.0;
  for (double x : samples) sum += x - shift;
  const double n = static_cast<double>(samples.size());
  const double mean_shifted = sum / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - shift - mean_shifted) * (x - shift - mean_shifted);
  r.mean_energy = shift + mean_shifted;
  r.std_error = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return r;
}

}  // namespace detail

/// Per-episode energies of the DP policy and (optionally) the equal-split
/// heuristic on common gain draws. Episode i uses stream seed.split(i).
struct PolicySamples {
  std::vector<double> dp;
  std::vector<double> equal_split;
};

inline PolicySamples sample_policies(double De, std::size_t episodes, const Planner& planner, std::uint64_t seed,
                                     bool with_equal_split) {
  PolicySamples out;
  out.dp.assign(episodes, 0.0);
  if (with_equal_split) out.equal_split.assign(episodes, 0.0);
  if (De == 0.0) return out;
  const BlockPlan plan = block_plan(De, planner.task(), planner.edge(), planner.radio());
  const auto tables = planner.tables_for(De);
  const CounterRng root(seed);
  parallel_for(episodes, [&](std::size_t i) {
    CounterRng rng = root.split(i);
    const auto gains = draw_gains(plan.blocks, planner.channel(), rng);
    out.dp[i] = run_episode_with_gains(De, plan, *tables, gains).total_energy;
    if (with_equal_split) out.equal_split[i] = run_equal_split(De, plan, planner.radio(), gains).total_energy;
  });
  return out;
}

inline MCResult monte_carlo(double De, std::size_t episodes, const Planner& planner, std::uint64_t seed) {
  if (episodes < 100) throw DomainError("monte_carlo needs at least 100 episodes");
  return detail::summarize(sample_policies(De, episodes, planner, seed, false).dp, seed);
}

inline MCResult monte_carlo(double De, std::size_t episodes, const TaskProfile& task, const EdgeProfile& edge,
                            const RadioProfile& radio, const GainDistribution& channel, std::uint64_t seed,
                            const PlannerSettings& settings = {}) {
  return monte_carlo(De, episodes, Planner(task, edge, radio, channel, settings), seed);
}

struct PolicyComparison {
  MCResult dp;
  MCResult equal_split;
  MCResult difference;  // equal_split - dp, paired per episode
};

/// Common-random-number comparison of the DP policy against equal split.
inline PolicyComparison compare_policies(double De, std::size_t episodes, const Planner& planner, std::uint64_t seed) {
  if (episodes < 100) throw DomainError("compare_policies needs at least 100 episodes");
  const auto s = sample_policies(De, episodes, planner, seed, true);
  std::vector<double> diff(episodes);
  for (std::size_t i = 0; i < episodes; ++i) diff[i] = s.equal_split[i] - s.dp[i];
  return {detail::summarize(s.dp, seed), detail::summarize(s.equal_split, seed), detail::summarize(diff, seed)};
}

/// CSV rows episode,n,h,d_n,t_n,energy (header written when `header` is set).
inline void write_trace_csv(std::ostream& os, std::size_t episode, const EpisodeTrace& trace, bool header) {
  if (header) os << "episode,n,h,d_n,t_n,energy\n";
  for (const auto& b : trace.blocks) {
    os << episode << ',' << b.n << ',' << format_double(b.h) << ',' << format_double(b.dn) << ','
       << format_double(b.duration) << ',' << format_double(b.energy) << '\n';
  }
}

}  // namespace mecoff
