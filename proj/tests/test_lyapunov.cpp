// Copyright 2026 The MEQC Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "meqc/lyapunov.hpp"
#include "oracles.hpp"

namespace meqc {
namespace {

TEST(QueueUpdate, Examples) {
  EXPECT_DOUBLE_EQ(queue_update(0.0, 0.0, 0.7), 0.7);
  EXPECT_DOUBLE_EQ(queue_update(0.5, 1.0, 0.7), 0.0);
  EXPECT_NEAR(queue_update(0.2, 0.1, 0.7), 0.1, 1e-15);
  EXPECT_NEAR(queue_update(0.2, 0.1, 0.7, QueueRule::kDrift), 0.8, 1e-15);
}

TEST(QueueUpdate, MatchesLiteralExpressionAndStaysNonNegative) {
  std::mt19937_64 g(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100000; ++i) {
    const double z = 5 * u(g);
    const double phi = (i % 4 == 0) ? 0.0 : u(g);
    const double delta = u(g);
    const double lit = std::max(0.0, z + delta * (phi == 0.0 ? 1.0 : 0.0) - phi);
    EXPECT_EQ(queue_update(z, phi, delta), lit);
    EXPECT_GE(queue_update(z, phi, delta, QueueRule::kDrift), 0.0);
  }
}

TEST(AdvanceQueues, StartsAtZeroAndAdvancesSlot) {
  auto q = VirtualQueueState::zeros(3, 0.7);
  for (double z : q.backlog) EXPECT_EQ(z, 0.0);
  const std::vector<double> phis{0.0, 0.5, 1.0};
  advance_queues(q, phis, QueueRule::kIndicator);
  EXPECT_EQ(q.slot, 1u);
  EXPECT_DOUBLE_EQ(q.backlog[0], 0.7);
  EXPECT_EQ(q.backlog[1], 0.0);
  EXPECT_EQ(q.backlog[2], 0.0);
}

TEST(DppObjective, Examples) {
  DppConfig cfg;
  cfg.v_param = 4;
  auto q = VirtualQueueState::zeros(3, 0.7);
  const std::vector<double> costs{1.0, 2.5, 3.0};
  const std::vector<double> phis{0.0, 0.3, 1.0};
  EXPECT_DOUBLE_EQ(dpp_objective(costs, phis, q, cfg), 4 * 6.5);

  cfg.v_param = 1;
  auto one = VirtualQueueState::zeros(1, 0.7);
  one.backlog[0] = 2;
  const std::vector<double> c1{3.0}, p1{1.0};
  EXPECT_DOUBLE_EQ(dpp_objective(c1, p1, one, cfg), 1.0);
}

TEST(DppObjective, MatchesBruteForceSummation) {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + i % 20;
    DppConfig cfg;
    cfg.v_param = 100 * u(g) + 0.01;
    auto q = VirtualQueueState::zeros(n, u(g));
    std::vector<double> costs(n), phis(n);
    double want_cost = 0, want_queue = 0;
    for (std::size_t m = 0; m < n; ++m) {
      costs[m] = 10 * u(g);
      phis[m] = (m % 3 == 0) ? 0.0 : u(g);
      q.backlog[m] = 5 * u(g);
      want_cost += costs[m];
      want_queue += q.backlog[m] * ((phis[m] == 0.0 ? q.target_rate : 0.0) - phis[m]);
    }
    const double want = cfg.v_param * want_cost + want_queue;
    EXPECT_NEAR(dpp_objective(costs, phis, q, cfg), want, 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST(DriftBound, Examples) {
  EXPECT_DOUBLE_EQ(drift_bound(15, 0.7), 7.5);
  EXPECT_DOUBLE_EQ(drift_bound(1, 1.0), 0.5);
}

TEST(DriftBound, DominatesSquaredIncrement) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100000; ++i) {
    const double delta = u(g);
    const double phi = (i % 5 == 0) ? 0.0 : u(g);
    for (QueueRule rule : {QueueRule::kIndicator, QueueRule::kDrift}) {
      const double inc = constraint_drift(phi, delta, rule);
      EXPECT_LE(0.5 * inc * inc, drift_bound(1, delta));
    }
  }
}

TEST(OptimalityGap, Examples) {
  const GapCheck g = optimality_gap(5.1, 5.0, 7.5, 0.0, 100.0);
  EXPECT_NEAR(g.gap, 0.1, 1e-12);
  EXPECT_DOUBLE_EQ(g.bound_value, 0.075);
  EXPECT_FALSE(g.holds);
  double prev = 1e300;
  for (double v : {1.0, 1e2, 1e4, 1e8}) {
    const double b = optimality_gap(1, 1, 7.5, 0, v).bound_value;
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_LT(prev, 1e-7);
}

TEST(ConvergenceProbe, Examples) {
  const std::vector<std::vector<double>> ones(50, std::vector<double>(3, 1.0));
  const std::vector<std::vector<double>> zeros(50, std::vector<double>(3, 0.0));
  for (std::size_t tau = 1; tau <= 50; ++tau) {
    EXPECT_LE(convergence_probe(ones, tau, 0.7), 0.0);
    EXPECT_DOUBLE_EQ(convergence_probe(zeros, tau, 0.7), 0.7);
  }
}

struct Instance {
  TaskSpec t;
  DeviceProfile d;
  ChannelState c;
};

Instance random_instance(oracle::Gen& g) {
  return {oracle::random_task(g), oracle::random_device(g), oracle::random_channel(g)};
}

TEST(SolveDevice, LocalChosenWhenEveryRemoteMissesDeadline) {
  oracle::Gen g(7);
  int checked = 0;
  for (int i = 0; i < 5000 && checked < 50; ++i) {
    auto x = random_instance(g);
    const auto q = oracle::random_qhw(g);
    const auto e = oracle::random_qec(g);
    // Deadline between the local time and the ack time of either mode.
    const double tl = local_time(x.t, 0, x.d);
    const double ack = x.t.ack_bits / tx_rate(x.c, x.d.tx_power_w);
    if (ack <= tl * 1.01) continue;
    x.t.deadline_s = 0.5 * (tl + ack);
    DppConfig cfg;
    const DeviceSolution s = solve_device({x.t, x.d, x.c, q, e}, 3.0, 0.7, cfg);
    EXPECT_EQ(s.decision.mode(), Mode::kLocal);
    EXPECT_TRUE(s.cost.feasible);
    ++checked;
  }
  EXPECT_EQ(checked, 50);
}

TEST(SolveDevice, LocalChosenWhenCheapestWithNoBacklog) {
  TaskSpec t{1e6, 10, 1e6, 10, 10, 1e6};
  DeviceProfile d;
  d.cpu_hz = 1e9;
  d.switched_cap_rho = 1e-30;
  d.exponent_zeta = 2;
  d.tx_power_w = 0.1;
  d.leased_cpu_hz = 1e9;
  d.leased_qubits = 100;
  d.server_switched_cap_rho = 1e-27;
  const ChannelState c{1e-10, 1e6, 1e-13};
  QuantumHardwareParams q;
  q.t_1qb_s = 1e-3;
  q.n_1qb = 1;
  q.p_1qb_w = 1;
  const QecParams e{1e-3, 1e-2, 1};
  const double local = evaluate(Decision::local(), t, d, c, q, e).wset;
  ASSERT_LT(local, evaluate(Decision::remote(Mode::kCpu, 1), t, d, c, q, e).wset);
  ASSERT_LT(local, evaluate(Decision::remote(Mode::kQpu, 1), t, d, c, q, e).wset);
  DppConfig cfg;
  const DeviceSolution s = solve_device({t, d, c, q, e}, 0.0, 0.0, cfg);
  EXPECT_EQ(s.decision.phi, 0.0);
}

TEST(SolveDevice, NotWorseThanFineGrid) {
  oracle::Gen g(11);
  std::uniform_real_distribution<double> u(0, 1);
  int compared = 0;
  for (int i = 0; i < 100; ++i) {
    auto x = random_instance(g);
    const auto q = oracle::random_qhw(g);
    const auto e = oracle::random_qec(g);
    // Keep deadlines near the achievable range so the feasible set is a
    // proper sub-interval in a good share of instances.
    x.t.deadline_s = local_time(x.t, 0, x.d) * (0.2 + 1.2 * u(g));
    DppConfig cfg;
    cfg.v_param = 0.1 + 100 * u(g);
    cfg.rule = (i % 2) ? QueueRule::kDrift : QueueRule::kIndicator;
    const double z = 10 * u(g) * local_time(x.t, 0, x.d);
    const double delta = u(g);
    const DeviceSolution s = solve_device({x.t, x.d, x.c, q, e}, z, delta, cfg);
    const oracle::GridBest best =
        oracle::grid_device(x.t, x.d, x.c, q, e, cfg.v_param, z, delta, cfg.rule == QueueRule::kIndicator, 10000);
    EXPECT_EQ(s.cost.feasible, best.feasible);
    if (best.feasible) {
      EXPECT_LE(s.objective, best.objective + 1e-9 + 1e-12 * std::abs(best.objective));
      ++compared;
    } else {
      EXPECT_LE(s.cost.time_s, best.time * (1 + 1e-9));
    }
  }
  EXPECT_GT(compared, 30);
}

TEST(SolveSlot, SeparableAcrossDevices) {
  oracle::Gen g(13);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t n = 12;
  std::vector<TaskSpec> tasks;
  std::vector<DeviceProfile> devs;
  std::vector<ChannelState> chans;
  for (std::size_t m = 0; m < n; ++m) {
    auto x = random_instance(g);
    x.t.deadline_s = local_time(x.t, 0, x.d) * (0.2 + 1.2 * u(g));
    tasks.push_back(x.t);
    devs.push_back(x.d);
    chans.push_back(x.c);
  }
  const auto q = oracle::random_qhw(g);
  const auto e = oracle::random_qec(g);
  auto queues = VirtualQueueState::zeros(n, 0.6);
  for (auto& z : queues.backlog) z = 5 * u(g);
  DppConfig cfg;
  const SlotSolution joint = solve_slot(tasks, devs, chans, q, e, queues, cfg);
  double sum = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const DeviceSolution alone = solve_device({tasks[m], devs[m], chans[m], q, e}, queues.backlog[m], 0.6, cfg);
    EXPECT_EQ(alone.decision.phi, joint.decisions[m].phi);
    EXPECT_EQ(alone.decision.mode(), joint.decisions[m].mode());
    EXPECT_EQ(alone.objective, joint.per_device_objective[m]);
    sum += joint.per_device_objective[m];
  }
  EXPECT_DOUBLE_EQ(joint.objective, sum);

  std::vector<double> costs, phis;
  for (std::size_t m = 0; m < n; ++m) {
    costs.push_back(joint.costs[m].wset);
    phis.push_back(joint.decisions[m].phi);
  }
  EXPECT_NEAR(dpp_objective(costs, phis, queues, cfg), joint.objective, 1e-9 * std::abs(joint.objective));
}

TEST(SolveDevice, NeverPicksUnavailableQpu) {
  oracle::Gen g(19);
  for (int i = 0; i < 500; ++i) {
    auto x = random_instance(g);
    const auto q = oracle::random_qhw(g);
    auto e = oracle::random_qec(g);
    x.t.circuit_qubits = x.d.leased_qubits + 1;
    DppConfig cfg;
    const DeviceSolution s = solve_device({x.t, x.d, x.c, q, e}, 1.0, 0.7, cfg);
    EXPECT_NE(s.decision.mode(), Mode::kQpu);
    EXPECT_GE(s.decision.phi, 0.0);
    EXPECT_LE(s.decision.phi, 1.0);
  }
}

TEST(ConvergenceBound, DecaysWithTau) {
  double prev = 1e300;
  for (std::size_t tau : {1u, 10u, 100u, 1000u}) {
    const double b = convergence_bound(0.5, 0, 10, 1.0, 1.0, tau);
    EXPECT_LT(b, prev);
    EXPECT_NEAR(b, std::sqrt(1.0 / static_cast<double>(tau)), 1e-15);
    prev = b;
  }
}

}  // namespace
}  // namespace meqc
