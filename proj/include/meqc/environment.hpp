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

// The stochastic world: Gauss-Markov mobility inside a circular cell, a
// path-loss / shadowing / fading uplink, and synthetic protein-folding tasks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "meqc/core_model.hpp"
#include "meqc/units.hpp"

namespace meqc {

using Rng = std::mt19937_64;

/// Uniform real in [lo, hi]; exact for degenerate ranges.
inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 64>(rng);
}

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

struct MobilityState {
  double x_m = 0;
  double y_m = 0;
  double speed = 0;
  double direction = 0;
  double mean_speed = 0;
  double mean_direction = 0;
  double memory = 0.5;
};

struct WorldConfig {
  double cell_radius_m = 50;
  std::int64_t num_devices = 15;
  double bandwidth_hz = 1e8;
  double pathloss_exponent = 3;
  double pathloss_ref_db = 30;
  double shadowing_sigma_db = 8;
  bool fading = true;
  double noise_power_dbm = -100;
  std::uint64_t rng_seed = 1;

  // Per-device draws made once at construction.
  double tx_power_min_dbm = 0.01;
  double tx_power_max_dbm = 0.2;
  std::vector<double> cpu_hz_choices = {1e9, 2e9, 3e9};
  double leased_cpu_hz_min = 1e10;
  double leased_cpu_hz_max = 2e10;
  std::int64_t leased_qubits_min = 1000;
  std::int64_t leased_qubits_max = 5000;
  double switched_cap_rho = 1e-28;
  double exponent_zeta = 3;
  std::optional<double> server_switched_cap_rho = 6e-31;
  double weight_time = 0.5;
  double weight_energy = 0.5;

  double mean_speed_min = 3;
  double mean_speed_max = 5;
  double mobility_memory = 0.5;

  double noise_power_w() const { return dbm_to_watts(noise_power_dbm); }
};

struct TaskGenConfig {
  std::int64_t amino_min = 30;
  std::int64_t amino_max = 90;
  double datasize_min_mb = 160e2;
  double datasize_max_mb = 320e2;
  double cycles_per_bit_min = 50;
  double cycles_per_bit_max = 200;
  double deadline_min_s = 1000;
  double deadline_max_s = 5000;
  std::int64_t depth_min = 10;
  std::int64_t depth_max = 100;
  double ack_mb = 1;
};

/// Deterministic part of the Gauss-Markov recursion given the two noise draws.
inline MobilityState gmmm_step(const MobilityState& s, double speed_noise, double direction_noise) {
  MobilityState n = s;
  const double a = s.memory;
  const double spread = std::sqrt(std::max(0.0, 1.0 - a * a));
  n.speed = a * s.speed + (1 - a) * s.mean_speed + spread * speed_noise;
  n.speed = std::clamp(n.speed, 0.0, 2 * s.mean_speed);
  n.direction = a * s.direction + (1 - a) * s.mean_direction + spread * direction_noise;
  return n;
}

inline MobilityState gmmm_step(const MobilityState& s, Rng& rng) {
  const double dv = standard_normal(rng);
  const double dd = standard_normal(rng);
  return gmmm_step(s, dv, dd);
}

/// Moves the device one slot along its heading. A device that would leave
/// the cell is put back on the boundary and both its heading and mean
/// heading are turned towards the cell centre.
inline MobilityState position_step(const MobilityState& s, double cell_radius) {
  MobilityState n = s;
  n.x_m += s.speed * std::cos(s.direction);
  n.y_m += s.speed * std::sin(s.direction);
  const double r = std::hypot(n.x_m, n.y_m);
  if (r > cell_radius) {
    n.x_m *= cell_radius / r;
    n.y_m *= cell_radius / r;
    n.direction = std::atan2(-n.y_m, -n.x_m);
    n.mean_direction = n.direction;
  }
  return n;
}

/// Path loss in dB at `distance_m`, with the reference distance floored at 1 m.
inline double pathloss_db(double distance_m, const WorldConfig& cfg) {
  return cfg.pathloss_ref_db + 10 * cfg.pathloss_exponent * std::log10(std::max(distance_m, 1.0));
}

inline ChannelState channel_sample(const MobilityState& pos, const WorldConfig& cfg, Rng& rng) {
  const double distance = std::hypot(pos.x_m, pos.y_m);
  double loss_db = pathloss_db(distance, cfg);
  if (cfg.shadowing_sigma_db > 0) loss_db += cfg.shadowing_sigma_db * standard_normal(rng);
  double fading = 1.0;
  if (cfg.fading) {
    do {
      fading = std::exponential_distribution<double>(1.0)(rng);
    } while (!(fading > 0));
  }
  return {db_to_linear(-loss_db) * fading, cfg.bandwidth_hz, cfg.noise_power_w()};
}

inline TaskSpec generate_task(const TaskGenConfig& cfg, Rng& rng) {
  TaskSpec t;
  const std::int64_t amino = uniform_int(rng, cfg.amino_min, cfg.amino_max);
  t.data_bits = megabits_to_bits(uniform_real(rng, cfg.datasize_min_mb, cfg.datasize_max_mb));
  t.cycles_per_bit = uniform_real(rng, cfg.cycles_per_bit_min, cfg.cycles_per_bit_max);
  t.deadline_s = uniform_real(rng, cfg.deadline_min_s, cfg.deadline_max_s);
  t.circuit_qubits = amino;
  t.circuit_depth = uniform_int(rng, cfg.depth_min, cfg.depth_max);
  t.ack_bits = megabits_to_bits(cfg.ack_mb);
  return t;
}

/// Tasks and channels realised for every device in one slot.
struct SlotDraw {
  std::vector<TaskSpec> tasks;
  std::vector<ChannelState> channels;
};

/// One simulated cell. Device hardware and initial placement come from the
/// static seed; tasks, channels and movement come from the dynamic seed, so
/// worlds sharing a static seed host the same devices.
class World {
 public:
  World(const WorldConfig& world, const TaskGenConfig& taskgen, std::uint64_t static_seed, std::uint64_t dynamic_seed)
      : world_(world), taskgen_(taskgen), rng_(dynamic_seed) {
    Rng setup(static_seed);
    const auto n = static_cast<std::size_t>(world.num_devices);
    devices_.reserve(n);
    mobility_.reserve(n);
    for (std::size_t m = 0; m < n; ++m) {
      DeviceProfile d;
      const auto choice = uniform_int(setup, 0, static_cast<std::int64_t>(world.cpu_hz_choices.size()) - 1);
      d.cpu_hz = world.cpu_hz_choices[static_cast<std::size_t>(choice)];
      d.switched_cap_rho = world.switched_cap_rho;
      d.exponent_zeta = world.exponent_zeta;
      d.tx_power_w = dbm_to_watts(uniform_real(setup, world.tx_power_min_dbm, world.tx_power_max_dbm));
      d.weight_time = world.weight_time;
      d.weight_energy = world.weight_energy;
      d.leased_cpu_hz = uniform_real(setup, world.leased_cpu_hz_min, world.leased_cpu_hz_max);
      d.leased_qubits = uniform_int(setup, world.leased_qubits_min, world.leased_qubits_max);
      d.server_switched_cap_rho = world.server_switched_cap_rho.value_or(world.switched_cap_rho);
      devices_.push_back(d);

      MobilityState s;
      const double radius = world.cell_radius_m * std::sqrt(std::generate_canonical<double, 64>(setup));
      const double angle = 2 * std::numbers::pi * std::generate_canonical<double, 64>(setup);
      s.x_m = radius * std::cos(angle);
      s.y_m = radius * std::sin(angle);
      s.mean_speed = uniform_real(setup, world.mean_speed_min, world.mean_speed_max);
      s.mean_direction = 2 * std::numbers::pi * std::generate_canonical<double, 64>(setup);
      s.speed = s.mean_speed;
      s.direction = s.mean_direction;
      s.memory = world.mobility_memory;
      mobility_.push_back(s);
    }
  }

  std::size_t size() const { return devices_.size(); }
  const std::vector<DeviceProfile>& devices() const { return devices_; }
  std::vector<DeviceProfile>& devices() { return devices_; }
  const std::vector<MobilityState>& mobility() const { return mobility_; }
  const WorldConfig& config() const { return world_; }
  const TaskGenConfig& taskgen() const { return taskgen_; }

  /// Draws this slot's channels (at current positions) and tasks.
  SlotDraw draw_slot() {
    SlotDraw d;
    d.tasks.reserve(size());
    d.channels.reserve(size());
    for (std::size_t m = 0; m < size(); ++m) {
      d.channels.push_back(channel_sample(mobility_[m], world_, rng_));
      d.tasks.push_back(generate_task(taskgen_, rng_));
    }
    return d;
  }

  /// Moves every device by one slot, then evolves speed and heading.
  void advance() {
    for (auto& s : mobility_) {
      s = position_step(s, world_.cell_radius_m);
      s = gmmm_step(s, rng_);
    }
  }

 private:
  WorldConfig world_;
  TaskGenConfig taskgen_;
  Rng rng_;
  std::vector<DeviceProfile> devices_;
  std::vector<MobilityState> mobility_;
};

}  // namespace meqc
