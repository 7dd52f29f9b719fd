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

#include <cmath>
#include <numbers>

#include "meqc/environment.hpp"

namespace meqc {
namespace {

TEST(Gmmm, FullMemoryIsIdentity) {
  MobilityState s{1, 2, 3.5, 0.4, 4, 1.2, 1.0};
  for (double noise : {-3.0, 0.0, 2.5}) {
    const MobilityState n = gmmm_step(s, noise, -noise);
    EXPECT_DOUBLE_EQ(n.speed, s.speed);
    EXPECT_DOUBLE_EQ(n.direction, s.direction);
  }
}

TEST(Gmmm, NoMemoryZeroNoiseReturnsMeans) {
  MobilityState s{1, 2, 1.0, 0.4, 4, 1.2, 0.0};
  const MobilityState n = gmmm_step(s, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(n.speed, 4.0);
  EXPECT_DOUBLE_EQ(n.direction, 1.2);
}

TEST(Gmmm, SpeedClampedToTwiceMean) {
  MobilityState s{0, 0, 4, 0, 4, 0, 0.5};
  EXPECT_DOUBLE_EQ(gmmm_step(s, 100.0, 0.0).speed, 8.0);
  EXPECT_DOUBLE_EQ(gmmm_step(s, -100.0, 0.0).speed, 0.0);
}

TEST(Gmmm, StationaryMeansConverge) {
  Rng rng(9);
  MobilityState s{0, 0, 4, 1.0, 4, 1.0, 0.5};
  const int n = 100000;
  double sum_speed = 0, sum_dir = 0;
  for (int i = 0; i < n; ++i) {
    s = gmmm_step(s, rng);
    sum_speed += s.speed;
    sum_dir += s.direction;
  }
  // Lag-one correlation 0.5 inflates the variance of the mean by (1+a)/(1-a).
  const double inflation = std::sqrt(3.0);
  const double se_speed = std::sqrt(0.75) / std::sqrt(double(n)) * inflation;
  EXPECT_NEAR(sum_speed / n, 4.0, 3 * se_speed);
  EXPECT_NEAR(sum_dir / n, 1.0, 3 * se_speed);
}

TEST(PositionStep, Examples) {
  MobilityState still{7, -3, 0, 1.0, 4, 1.0, 0.5};
  const MobilityState a = position_step(still, 50);
  EXPECT_EQ(a.x_m, 7);
  EXPECT_EQ(a.y_m, -3);
  MobilityState s{0, 0, 3, 0, 4, 0, 0.5};
  const MobilityState b = position_step(s, 50);
  EXPECT_DOUBLE_EQ(b.x_m, 3);
  EXPECT_DOUBLE_EQ(b.y_m, 0);
}

TEST(PositionStep, LeavingTheCellTurnsTowardsCentre) {
  MobilityState s{49, 0, 5, 0, 4, 0, 0.5};
  const MobilityState n = position_step(s, 50);
  EXPECT_NEAR(std::hypot(n.x_m, n.y_m), 50, 1e-12);
  EXPECT_NEAR(std::cos(n.direction), -1, 1e-12);
  EXPECT_DOUBLE_EQ(n.mean_direction, n.direction);
}

TEST(PositionStep, LongTrajectoryStaysInDisc) {
  Rng rng(12);
  MobilityState s{10, 10, 5, 0.3, 5, 0.3, 0.5};
  for (int i = 0; i < 100000; ++i) {
    s = position_step(s, 50);
    ASSERT_LE(std::hypot(s.x_m, s.y_m), 50 * (1 + 1e-12));
    s = gmmm_step(s, rng);
  }
}

WorldConfig plain_channel() {
  WorldConfig w;
  w.shadowing_sigma_db = 0;
  w.fading = false;
  return w;
}

TEST(Channel, DoublingDistanceCostsNineDecibels) {
  const WorldConfig w = plain_channel();
  Rng rng(1);
  MobilityState near{10, 0, 0, 0, 0, 0, 0.5};
  MobilityState far{20, 0, 0, 0, 0, 0, 0.5};
  const double g1 = channel_sample(near, w, rng).gain;
  const double g2 = channel_sample(far, w, rng).gain;
  EXPECT_NEAR(10 * std::log10(g1 / g2), 30 * std::log10(2.0), 1e-9);
}

TEST(Channel, PathLossFloorsAtReferenceDistance) {
  const WorldConfig w = plain_channel();
  Rng rng(1);
  MobilityState at{0.3, 0.2, 0, 0, 0, 0, 0.5};
  EXPECT_NEAR(channel_sample(at, w, rng).gain, 1e-3, 1e-15);
  EXPECT_DOUBLE_EQ(pathloss_db(0.5, w), 30.0);
}

TEST(Channel, FadingHasUnitMean) {
  WorldConfig w = plain_channel();
  w.fading = true;
  Rng rng(2);
  MobilityState at{0, 0, 0, 0, 0, 0, 0.5};
  const int n = 1000000;
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += channel_sample(at, w, rng).gain / 1e-3;
  EXPECT_NEAR(sum / n, 1.0, 0.01);
}

TEST(Channel, GainPositiveAndFallsWithDistanceOnAverage) {
  const WorldConfig w;
  double prev = std::numeric_limits<double>::infinity();
  for (double d : {2.0, 5.0, 15.0, 45.0}) {
    Rng rng(77);
    MobilityState at{d, 0, 0, 0, 0, 0, 0.5};
    double sum = 0;
    for (int i = 0; i < 20000; ++i) {
      const double g = channel_sample(at, w, rng).gain;
      ASSERT_GT(g, 0.0);
      ASSERT_TRUE(std::isfinite(g));
      sum += g;
    }
    EXPECT_LT(sum, prev);
    prev = sum;
  }
}

TEST(Tasks, DegenerateRangesAreDeterministic) {
  TaskGenConfig c;
  c.amino_min = c.amino_max = 42;
  c.datasize_min_mb = c.datasize_max_mb = 100;
  c.cycles_per_bit_min = c.cycles_per_bit_max = 75;
  c.deadline_min_s = c.deadline_max_s = 3;
  c.depth_min = c.depth_max = 20;
  Rng a(1), b(999);
  const TaskSpec x = generate_task(c, a);
  const TaskSpec y = generate_task(c, b);
  EXPECT_EQ(x.circuit_qubits, 42);
  EXPECT_EQ(x.data_bits, 1e8);
  EXPECT_EQ(x.cycles_per_bit, 75);
  EXPECT_EQ(x.deadline_s, 3);
  EXPECT_EQ(x.circuit_depth, 20);
  EXPECT_EQ(x.data_bits, y.data_bits);
  EXPECT_EQ(x.deadline_s, y.deadline_s);
}

TEST(Tasks, DrawsStayInRange) {
  const TaskGenConfig c;
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const TaskSpec t = generate_task(c, rng);
    ASSERT_GE(t.circuit_qubits, 30);
    ASSERT_LE(t.circuit_qubits, 90);
    ASSERT_GE(t.data_bits, c.datasize_min_mb * 1e6);
    ASSERT_LE(t.data_bits, c.datasize_max_mb * 1e6);
    ASSERT_GE(t.circuit_depth, c.depth_min);
    ASSERT_LE(t.circuit_depth, c.depth_max);
    ASSERT_GE(t.deadline_s, c.deadline_min_s);
    ASSERT_LE(t.deadline_s, c.deadline_max_s);
  }
}

TEST(World, SameSeedsGiveIdenticalStreams) {
  World a(WorldConfig{}, TaskGenConfig{}, 5, 6);
  World b(WorldConfig{}, TaskGenConfig{}, 5, 6);
  for (std::size_t m = 0; m < a.size(); ++m) {
    EXPECT_EQ(a.devices()[m].cpu_hz, b.devices()[m].cpu_hz);
    EXPECT_EQ(a.devices()[m].tx_power_w, b.devices()[m].tx_power_w);
    EXPECT_EQ(a.devices()[m].leased_qubits, b.devices()[m].leased_qubits);
  }
  for (int r = 0; r < 200; ++r) {
    const SlotDraw x = a.draw_slot();
    const SlotDraw y = b.draw_slot();
    for (std::size_t m = 0; m < a.size(); ++m) {
      ASSERT_EQ(x.channels[m].gain, y.channels[m].gain);
      ASSERT_EQ(x.tasks[m].data_bits, y.tasks[m].data_bits);
      ASSERT_EQ(x.tasks[m].circuit_depth, y.tasks[m].circuit_depth);
      ASSERT_EQ(a.mobility()[m].x_m, b.mobility()[m].x_m);
    }
    a.advance();
    b.advance();
  }
}

TEST(World, StaticDrawsWithinConfiguredRanges) {
  const WorldConfig w;
  World world(w, TaskGenConfig{}, 11, 12);
  ASSERT_EQ(world.size(), 15u);
  for (const auto& d : world.devices()) {
    EXPECT_TRUE(d.cpu_hz == 1e9 || d.cpu_hz == 2e9 || d.cpu_hz == 3e9);
    EXPECT_GE(d.leased_qubits, 1000);
    EXPECT_LE(d.leased_qubits, 5000);
    EXPECT_GE(d.leased_cpu_hz, 1e10);
    EXPECT_LE(d.leased_cpu_hz, 2e10);
  }
  for (const auto& s : world.mobility()) EXPECT_LE(std::hypot(s.x_m, s.y_m), 50.0);
}

TEST(World, StaticSeedFixesDevicesDynamicSeedVariesTasks) {
  World a(WorldConfig{}, TaskGenConfig{}, 5, 6);
  World b(WorldConfig{}, TaskGenConfig{}, 5, 7);
  for (std::size_t m = 0; m < a.size(); ++m) EXPECT_EQ(a.devices()[m].leased_cpu_hz, b.devices()[m].leased_cpu_hz);
  EXPECT_NE(a.draw_slot().tasks[0].data_bits, b.draw_slot().tasks[0].data_bits);
}

}  // namespace
}  // namespace meqc
