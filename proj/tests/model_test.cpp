#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mecoff/model.hpp"
#include "mecoff/rng.hpp"

using namespace mecoff;

namespace {

// c0=40, T=20 ms, T_f=2 ms, D=4e4 nats, f_l^U=0.5 GHz, f_e=1 GHz, k=1e-23, W=1 MHz.
const TaskProfile kTask{0.02, 4e4, 40.0, 0.5e9, 1e-23};
const EdgeProfile kEdge{1e9};
const RadioProfile kRadio{1e6, 2e-3};

}  // namespace

TEST(LocalEnergy, HandValues) {
  EXPECT_EQ(local_energy(0.0, kTask), 0.0);
  EXPECT_NEAR(local_energy(4e4, kTask), 0.1024, 1e-15);
  EXPECT_NEAR(local_energy(2e4, kTask), 0.0128, 1e-16);
}

TEST(LocalEnergy, CapIsInfeasible) {
  EXPECT_NEAR(kTask.local_capacity(), 2.5e5, 1e-6);
  EXPECT_NO_THROW(local_energy(2.5e5, kTask));
  EXPECT_THROW(local_energy(2.5e5 + 1.0, kTask), InfeasibleError);
  EXPECT_THROW(local_energy(-1.0, kTask), DomainError);
}

TEST(LocalEnergy, CubicScaling) {
  CounterRng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double x = 1.0 + rng.uniform() * 1e5;
    EXPECT_NEAR(local_energy(2.0 * x, kTask) / local_energy(x, kTask), 8.0, 1e-13);
  }
}

TEST(EdgeTime, HandValues) {
  EXPECT_EQ(edge_time(0.0, kTask, kEdge), 0.0);
  EXPECT_NEAR(edge_time(4e4, kTask, kEdge), 1.6e-3, 1e-18);
  EXPECT_NEAR(edge_time(5e4, kTask, kEdge), 2.0e-3, 1e-18);
  EXPECT_THROW(edge_time(5e5, kTask, kEdge), InfeasibleError);
}

TEST(BlockGeometry, HandValues) {
  EXPECT_EQ(block_count(4e4, kTask, kEdge, kRadio), 10);
  EXPECT_EQ(block_count(7.5e4, kTask, kEdge, kRadio), 9);
  EXPECT_EQ(block_count(0.0, kTask, kEdge, kRadio), 10);
  EXPECT_NEAR(last_block_time(4e4, kTask, kEdge, kRadio), 0.4e-3, 1e-15);
  EXPECT_NEAR(last_block_time(5e4, kTask, kEdge, kRadio), 2.0e-3, 1e-15);
  EXPECT_NEAR(last_block_time(0.0, kTask, kEdge, kRadio), 2.0e-3, 1e-15);
}

TEST(BlockGeometry, ExactBoundaryUsesBlockCountFormula) {
  // (T - T_e) / T_f = 9 exactly: nine blocks, last one full.
  EXPECT_EQ(block_count(5e4, kTask, kEdge, kRadio), 9);
  EXPECT_EQ(block_count(5e4 - 1e-3, kTask, kEdge, kRadio), 10);
  EXPECT_EQ(block_count(5e4 + 1e-3, kTask, kEdge, kRadio), 9);
}

TEST(BlockGeometry, ConsistencyIdentityProperty) {
  CounterRng rng(11);
  const double top = kTask.deadline_T * kEdge.edge_cpu_fe / kTask.cycles_per_nat_c0;
  const auto partition = interval_partition(kTask, kEdge, kRadio);
  for (int i = 0; i < 5000; ++i) {
    // Mix random points with exact boundaries.
    const double De = i % 10 == 0 ? partition.intervals[static_cast<std::size_t>(i / 10 % 9 + 1)].upper
                                   : rng.uniform() * top * 0.999999;
    const int N = block_count(De, kTask, kEdge, kRadio);
    const double t1 = last_block_time(De, kTask, kEdge, kRadio);
    const double te = edge_time(De, kTask, kEdge);
    EXPECT_NEAR(t1 + (N - 1) * kRadio.block_len_Tf + te, kTask.deadline_T, 1e-12);
    EXPECT_GT(t1, 0.0);
    EXPECT_LE(t1, kRadio.block_len_Tf);
    if (De > 0.0) {
      EXPECT_EQ(interval_of(De, partition) + 1, N);
    }
  }
}

TEST(BlockGeometry, CountIsNonincreasingStep) {
  int prev = block_count(0.0, kTask, kEdge, kRadio);
  const auto partition = interval_partition(kTask, kEdge, kRadio);
  for (double De = 100.0; De < 4.999e5; De += 100.0) {
    const int cur = block_count(De, kTask, kEdge, kRadio);
    EXPECT_LE(cur, prev);
    if (cur < prev) {
      // Jumps happen exactly at (T - i T_f) f_e / c0.
      EXPECT_NEAR(De, partition.at(cur).upper, 1e-6) << De;
    }
    prev = cur;
  }
}

TEST(TxPower, ClosedForms) {
  const double t = 2e-3, W = 1e6;
  EXPECT_EQ(tx_power(0.0, 100.0, t, W), 0.0);
  EXPECT_NEAR(tx_power(t * W * std::numbers::ln2, 100.0, t, W), 0.01, 1e-15);
  EXPECT_NEAR(tx_power(2.0 * t * W * std::numbers::ln2, 100.0, t, W), 0.03, 1e-15);
  EXPECT_THROW(tx_power(1.0, 0.0, t, W), DomainError);
  EXPECT_THROW(tx_power(1.0, 1.0, 0.0, W), DomainError);
}

TEST(TxEnergy, ClosedForms) {
  const double d = 2e-3 * 1e6 * std::numbers::ln2;
  EXPECT_EQ(tx_energy(0.0, 100.0, 2e-3, 1e6), 0.0);
  EXPECT_NEAR(tx_energy(d, 100.0, 2e-3, 1e6), 2e-5, 1e-18);
  EXPECT_NEAR(tx_energy(d, 200.0, 2e-3, 1e6), 1e-5, 1e-18);
  EXPECT_THROW(tx_energy(1.0, -1.0, 2e-3, 1e6), DomainError);
}

TEST(TxEnergy, ConvexInDataProperty) {
  CounterRng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double h = 0.1 + rng.uniform() * 1000.0;
    const double t = 1e-4 + rng.uniform() * 4e-3;
    const double W = 1e5 + rng.uniform() * 1e7;
    const double step = t * W * (0.01 + rng.uniform());
    const double d = rng.uniform() * 3.0 * t * W;
    const double e0 = tx_energy(d, h, t, W), e1 = tx_energy(d + step, h, t, W), e2 = tx_energy(d + 2 * step, h, t, W);
    EXPECT_GE(e2 - 2.0 * e1 + e0, -1e-12 * e2);
    EXPECT_GT(e1, e0);
  }
}

TEST(IntervalPartition, DefaultParameters) {
  const auto p = interval_partition(kTask, kEdge, kRadio);
  ASSERT_EQ(p.i_star, 9);
  ASSERT_EQ(p.intervals.size(), 10u);
  EXPECT_NEAR(p.at(0).lower, 4.5e5, 1e-6);
  EXPECT_NEAR(p.at(0).upper, 5e5, 1e-6);
  EXPECT_EQ(p.at(9).lower, 0.0);
  EXPECT_NEAR(p.at(9).upper, 5e4, 1e-6);
  for (int i = 0; i < p.i_star; ++i) {
    EXPECT_DOUBLE_EQ(p.at(i).lower, p.at(i + 1).upper);  // contiguous
  }
  EXPECT_THROW(p.at(10), DomainError);
}

TEST(IntervalPartition, SingleBlockRegime) {
  TaskProfile task = kTask;
  task.deadline_T = kRadio.block_len_Tf;
  const auto p = interval_partition(task, kEdge, kRadio);
  EXPECT_EQ(p.i_star, 0);
  ASSERT_EQ(p.intervals.size(), 1u);
  EXPECT_EQ(p.at(0).lower, 0.0);
  EXPECT_NEAR(p.at(0).upper, task.deadline_T * kEdge.edge_cpu_fe / task.cycles_per_nat_c0, 1e-6);
}

TEST(IntervalOf, Membership) {
  const auto p = interval_partition(kTask, kEdge, kRadio);
  EXPECT_EQ(interval_of(4e4, p), 9);
  EXPECT_EQ(interval_of(5e4, p), 8);
  EXPECT_EQ(interval_of(7.5e4, p), 8);
  EXPECT_THROW(interval_of(0.0, p), DomainError);
  EXPECT_THROW(interval_of(5e5, p), DomainError);
}

TEST(Profiles, Validation) {
  TaskProfile bad = kTask;
  bad.cpu_coeff_k = 0.0;
  EXPECT_THROW(validate(bad), DomainError);
  RadioProfile long_block{1e6, 0.5};
  EXPECT_THROW(validate(kTask, kEdge, long_block), DomainError);
  EXPECT_THROW(make_split(4e4 + 1.0, kTask), DomainError);
  const auto split = make_split(1e4, kTask);
  EXPECT_DOUBLE_EQ(split.offload_De + split.local_Dl, kTask.data_D);
}
