#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mecoff/sim.hpp"

using namespace mecoff;

namespace {

const TaskProfile kTask{0.02, 4e4, 40.0, 0.5e9, 1e-23};
const EdgeProfile kEdge{1e9};
const RadioProfile kRadio{1e6, 2e-3};
const GainDistribution kChannel = GainDistribution::rayleigh(100.0);

}  // namespace

TEST(Episode, ZeroOffloadIsEmpty) {
  const Planner planner(kTask, kEdge, kRadio, kChannel, {129, 32});
  const auto tables = planner.tables_for(1e4);
  CounterRng rng(1);
  const auto trace = run_episode(0.0, block_plan(0.0, kTask, kEdge, kRadio), *tables, kChannel, rng);
  EXPECT_TRUE(trace.blocks.empty());
  EXPECT_EQ(trace.total_energy, 0.0);
  const auto mc = monte_carlo(0.0, 100, planner, 3);
  EXPECT_EQ(mc.mean_energy, 0.0);
  EXPECT_EQ(mc.std_error, 0.0);
}

TEST(Episode, SingleBlockIsForced) {
  TaskProfile task = kTask;
  task.deadline_T = 2e-3;
  const Planner planner(task, kEdge, kRadio, kChannel, {129, 32});
  const double De = 1500.0;
  const auto plan = block_plan(De, task, kEdge, kRadio);
  ASSERT_EQ(plan.blocks, 1);
  const auto trace = run_episode_with_gains(De, plan, *planner.tables_for(De), {37.0});
  ASSERT_EQ(trace.blocks.size(), 1u);
  EXPECT_EQ(trace.blocks[0].dn, De);
  EXPECT_DOUBLE_EQ(trace.total_energy, tx_energy(De, 37.0, plan.t1, kRadio.bandwidth_W));
}

TEST(Episode, DegenerateTwoBlocksMatchDenseScan) {
  // T chosen so that N = 2 at De = 3000.
  TaskProfile task = kTask;
  task.deadline_T = 3.5e-3;
  const double h0 = 80.0, De = 3000.0;
  const Planner planner(task, kEdge, kRadio, GainDistribution::point_mass(h0), {513, 8});
  const auto plan = block_plan(De, task, kEdge, kRadio);
  ASSERT_EQ(plan.blocks, 2);
  const auto tables = planner.tables_for(De);
  const auto trace = run_episode_with_gains(De, plan, *tables, {h0, h0});
  double scan = kInf;
  for (int k = 0; k <= 10000; ++k) {
    const double x = De * k / 10000.0;
    scan = std::min(scan, tx_energy(x, h0, kRadio.block_len_Tf, kRadio.bandwidth_W) +
                              tx_energy(De - x, h0, plan.t1, kRadio.bandwidth_W));
  }
  // The realized energy is at least the true minimum and within the grid bound of it.
  EXPECT_GE(trace.total_energy, scan * (1.0 - 1e-6));
  EXPECT_LE(trace.total_energy, scan + interpolation_error_bound(*tables, 1) + 1e-9 * scan);
}

TEST(Episode, ConservesDataProperty) {
  const Planner planner(kTask, kEdge, kRadio, kChannel, {257, 32});
  CounterRng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const double De = 1.0 + rng.uniform() * 1.5e5;
    const auto plan = block_plan(De, kTask, kEdge, kRadio);
    const auto tables = planner.tables_for(De);
    const auto trace = run_episode(De, plan, *tables, kChannel, rng);
    ASSERT_EQ(static_cast<int>(trace.blocks.size()), plan.blocks);
    double sent = 0.0, energy = 0.0;
    for (std::size_t i = 0; i < trace.blocks.size(); ++i) {
      const auto& b = trace.blocks[i];
      EXPECT_GE(b.dn, 0.0);
      EXPECT_EQ(b.n, plan.blocks - static_cast<int>(i));
      EXPECT_EQ(b.duration, b.n == 1 ? plan.t1 : kRadio.block_len_Tf);
      sent += b.dn;
      energy += b.energy;
    }
    EXPECT_NEAR(sent, De, 1e-9);
    EXPECT_DOUBLE_EQ(energy, trace.total_energy);
  }
}

TEST(Episode, TableMismatchIsReported) {
  const Planner planner(kTask, kEdge, kRadio, kChannel, {129, 32});
  const auto tables = planner.tables_for(1e4);
  const auto plan = block_plan(4e4, kTask, kEdge, kRadio);
  CounterRng rng(2);
  EXPECT_THROW(run_episode(4e4, plan, *tables, kChannel, rng), ConsistencyError);
  const auto own = block_plan(1e4, kTask, kEdge, kRadio);
  EXPECT_THROW(run_episode_with_gains(1e4, own, *tables, {1.0}), ConsistencyError);
}

TEST(MonteCarlo, DeterministicPerSeed) {
  const Planner planner(kTask, kEdge, kRadio, kChannel, {129, 32});
  const auto a = monte_carlo(2e4, 500, planner, 42);
  const auto b = monte_carlo(2e4, 500, planner, 42);
  const auto c = monte_carlo(2e4, 500, planner, 43);
  EXPECT_EQ(a.mean_energy, b.mean_energy);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NE(a.mean_energy, c.mean_energy);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_EQ(a.episode_count, 500u);
  EXPECT_THROW(monte_carlo(2e4, 99, planner, 1), DomainError);
}

TEST(MonteCarlo, DegenerateChannelHasNoSpread) {
  const Planner planner(kTask, kEdge, kRadio, GainDistribution::point_mass(100.0), {129, 8});
  const double De = 2e4;
  const auto mc = monte_carlo(De, 200, planner, 9);
  EXPECT_EQ(mc.std_error, 0.0);
  const auto plan = block_plan(De, kTask, kEdge, kRadio);
  const auto one = run_episode_with_gains(De, plan, *planner.tables_for(De), std::vector<double>(10, 100.0));
  EXPECT_DOUBLE_EQ(mc.mean_energy, one.total_energy);
}

TEST(MonteCarlo, AgreesWithDpValue) {
  const Planner planner(kTask, kEdge, kRadio, kChannel);
  const double De = 4e4;
  const double dp = planner.offload_energy(De);
  const auto mc = monte_carlo(De, 10000, planner, 1);
  EXPECT_LE(std::abs(mc.mean_energy - dp), 3.0 * mc.std_error + 1e-6 * dp);
}

TEST(MonteCarlo, StdErrorScalesWithEpisodes) {
  // Gains near h_min make the default law's energies heavy tailed and its
  // sample variance erratic; a law bounded away from zero isolates the scaling.
  const auto bounded = GainDistribution::truncated_exponential(100.0, 10.0, 1000.0);
  const Planner planner(kTask, kEdge, kRadio, bounded, {257, 32});
  const auto a = monte_carlo(2e4, 10000, planner, 5);
  const auto b = monte_carlo(2e4, 20000, planner, 6);
  EXPECT_NEAR(b.std_error / a.std_error, 1.0 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
}

TEST(MonteCarlo, DpPolicyBeatsEqualSplit) {
  const Planner planner(kTask, kEdge, kRadio, kChannel, {257, 32});
  for (double De : {1e4, 4e4, 1e5}) {
    const auto cmp = compare_policies(De, 2000, planner, 11);
    EXPECT_LE(cmp.dp.mean_energy, cmp.equal_split.mean_energy) << "De=" << De;
    EXPECT_GT(cmp.difference.mean_energy, 0.0);
  }
}

TEST(TraceCsv, Schema) {
  EpisodeTrace trace;
  trace.blocks = {{2, 50.0, 10.0, 2e-3, 1e-6}, {1, 60.0, 5.0, 1e-3, 2e-7}};
  std::ostringstream os;
  write_trace_csv(os, 7, trace, true);
  EXPECT_EQ(os.str(), "episode,n,h,d_n,t_n,energy\n7,2,50,10,0.002,1e-06\n7,1,60,5,0.001,2e-07\n");
}
