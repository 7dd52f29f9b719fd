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

// Per-slot physical cost model of a hybrid edge / quantum offloading system.
//
// A device splits its task: a fraction `phi` of the data is shipped to the
// edge server and executed either on a leased CPU slice or on a QPU, the rest
// runs on the device. Every function here is a pure function of its inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace meqc {

/// Relative slack applied to every deadline comparison.
inline constexpr double kDeadlineTolerance = 1e-12;

/// Minimum success probability for a quantum execution to be admissible.
inline constexpr double kMinQuantumSuccess = 2.0 / 3.0;

enum class Mode : int { kLocal = 0, kCpu = 1, kQpu = 2 };
inline constexpr int kNumModes = 3;

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::kLocal: return "local";
    case Mode::kCpu: return "cpu";
    case Mode::kQpu: return "qpu";
  }
  return "?";
}

struct TaskSpec {
  double data_bits = 0;
  double cycles_per_bit = 0;
  double deadline_s = 0;
  std::int64_t circuit_qubits = 0;
  std::int64_t circuit_depth = 0;
  double ack_bits = 0;

  /// Locations where a logical error may occur.
  double logical_error_locations() const {
    return static_cast<double>(circuit_qubits) * static_cast<double>(circuit_depth);
  }
};

struct DeviceProfile {
  double cpu_hz = 0;
  double switched_cap_rho = 0;
  double exponent_zeta = 2;
  double tx_power_w = 0;
  double weight_time = 0.5;
  double weight_energy = 0.5;
  double leased_cpu_hz = 0;
  std::int64_t leased_qubits = 0;
  // Switched capacitance of the leased server CPU. Defaults to the device
  // constant when a profile is built from configuration without an override.
  double server_switched_cap_rho = 0;
};

struct ChannelState {
  double gain = 0;
  double bandwidth_hz = 0;
  double noise_power_w = 0;
};

struct QuantumHardwareParams {
  double t_1qb_s = 0, t_2qb_s = 0, t_meas_s = 0;
  double p_1qb_w = 0, p_2qb_w = 0, p_meas_w = 0, p_qubit_w = 0;
  double n_1qb = 0, n_2qb = 0, n_meas = 0;
  std::int64_t phys_per_logical = 1;

  /// Gate time per (bit x qubit) of offloaded work.
  double gate_time_per_unit() const { return t_1qb_s * n_1qb + t_2qb_s * n_2qb + t_meas_s * n_meas; }
  /// Gate plus qubit-upkeep energy per (bit x qubit) of offloaded work.
  double energy_per_unit() const {
    return p_1qb_w * n_1qb + p_2qb_w * n_2qb + p_meas_w * n_meas +
           p_qubit_w * static_cast<double>(phys_per_logical);
  }
};

struct QecParams {
  double err_rate = 0;
  double err_threshold = 0;
  std::int64_t concat_level = 0;
};

struct Decision {
  double phi = 0;
  bool use_classical = true;

  Mode mode() const {
    if (phi <= 0) return Mode::kLocal;
    return use_classical ? Mode::kCpu : Mode::kQpu;
  }
  static Decision local() { return {0.0, true}; }
  static Decision remote(Mode m, double phi) { return {phi, m != Mode::kQpu}; }
};

struct CostBreakdown {
  double time_s = 0;
  double energy_j = 0;
  double wset = 0;
  bool feasible = true;
  double local_time_s = 0;
  double remote_time_s = 0;
};

/// Times of the three remote stages: upload, server execution, result return.
struct StageTimes {
  double upload_s = 0;
  double compute_s = 0;
  double ack_s = 0;
  double total() const { return upload_s + compute_s + ack_s; }
};

inline double local_time(const TaskSpec& task, double phi, const DeviceProfile& dev) {
  return (1.0 - phi) * task.data_bits * task.cycles_per_bit / dev.cpu_hz;
}

inline double local_energy(const TaskSpec& task, double phi, const DeviceProfile& dev) {
  return dev.switched_cap_rho * std::pow(dev.cpu_hz, dev.exponent_zeta) * local_time(task, phi, dev);
}

/// Shannon rate of the device uplink.
inline double tx_rate(const ChannelState& ch, double tx_power_w) {
  return ch.bandwidth_hz * std::log1p(tx_power_w * ch.gain / ch.noise_power_w) / std::numbers::ln2;
}

inline StageTimes cloud_cpu_time(const TaskSpec& task, double phi, double rate_bps, const DeviceProfile& dev) {
  return {phi * task.data_bits / rate_bps, phi * task.data_bits * task.cycles_per_bit / dev.leased_cpu_hz,
          task.ack_bits / rate_bps};
}

inline double cloud_cpu_energy(const TaskSpec& task, double phi, double rate_bps, const DeviceProfile& dev) {
  const StageTimes t = cloud_cpu_time(task, phi, rate_bps, dev);
  const double server_power = dev.server_switched_cap_rho * std::pow(dev.leased_cpu_hz, dev.exponent_zeta);
  return dev.tx_power_w * t.upload_s + server_power * t.compute_s + dev.tx_power_w * t.ack_s;
}

inline StageTimes quantum_time(const TaskSpec& task, double phi, double rate_bps, const QuantumHardwareParams& qhw) {
  const double work = phi * task.data_bits * static_cast<double>(task.circuit_qubits);
  return {phi * task.data_bits / rate_bps, work * qhw.gate_time_per_unit(), task.ack_bits / rate_bps};
}

// The transmit power is charged against the upload and return stages.
inline double quantum_energy(const TaskSpec& task, double phi, double rate_bps, const DeviceProfile& dev,
                             const QuantumHardwareParams& qhw) {
  const StageTimes t = quantum_time(task, phi, rate_bps, qhw);
  const double work = phi * task.data_bits * static_cast<double>(task.circuit_qubits);
  return work * qhw.energy_per_unit() + dev.tx_power_w * (t.upload_s + t.ack_s);
}

/// Linearised success probability of an error-corrected execution. Not
/// clamped: very large circuits yield negative values.
inline double success_probability(const TaskSpec& task, const QecParams& qec) {
  const double ratio = qec.err_rate / qec.err_threshold;
  const double exponent = std::ldexp(1.0, static_cast<int>(qec.concat_level));
  return 1.0 - task.logical_error_locations() * qec.err_rate * std::pow(ratio, exponent);
}

inline bool quantum_feasible(const TaskSpec& task, const DeviceProfile& dev, const QecParams& qec) {
  return task.circuit_qubits <= dev.leased_qubits && success_probability(task, qec) >= kMinQuantumSuccess;
}

inline bool within_deadline(double time_s, double deadline_s) {
  return time_s <= deadline_s * (1.0 + kDeadlineTolerance);
}

/// Full cost of one slot's decision for one device.
///
/// The weighted sum follows the convex combination of local and remote
/// branches, each branch evaluated on its own share of the data. The deadline
/// metric is the later finisher of the two concurrently running branches.
inline CostBreakdown evaluate(const Decision& decision, const TaskSpec& task, const DeviceProfile& dev,
                              const ChannelState& ch, const QuantumHardwareParams& qhw, const QecParams& qec) {
  CostBreakdown out;
  const double phi = decision.phi;
  const double t_local = local_time(task, phi, dev);
  const double e_local = local_energy(task, phi, dev);
  out.local_time_s = t_local;
  if (phi <= 0) {
    out.time_s = t_local;
    out.energy_j = e_local;
    out.wset = dev.weight_time * t_local + dev.weight_energy * e_local;
    out.feasible = within_deadline(out.time_s, task.deadline_s);
    return out;
  }

  const double rate = tx_rate(ch, dev.tx_power_w);
  double t_remote = 0;
  double e_remote = 0;
  if (decision.use_classical) {
    t_remote = cloud_cpu_time(task, phi, rate, dev).total();
    e_remote = cloud_cpu_energy(task, phi, rate, dev);
  } else {
    t_remote = quantum_time(task, phi, rate, qhw).total();
    e_remote = quantum_energy(task, phi, rate, dev, qhw);
  }
  out.remote_time_s = t_remote;
  out.time_s = std::max(t_local, t_remote);
  out.energy_j = e_local + e_remote;
  out.wset = dev.weight_time * ((1.0 - phi) * t_local + phi * t_remote) +
             dev.weight_energy * ((1.0 - phi) * e_local + phi * e_remote);
  out.feasible = within_deadline(out.time_s, task.deadline_s) &&
                 (decision.use_classical || quantum_feasible(task, dev, qec));
  return out;
}

/// Closed-form shape of the weighted cost of one remote mode as a function of
/// the offloading fraction:
///
///   wset(phi) = local * (1 - phi)^2 + remote * phi^2 + ack * phi
///
/// together with the branch times needed for deadline analysis:
///   local branch time  = (1 - phi) * local_time_s
///   remote branch time = phi * remote_time_s + ack_time_s
struct ModeProfile {
  Mode mode = Mode::kLocal;
  double local = 0;
  double remote = 0;
  double ack = 0;
  double local_time_s = 0;
  double remote_time_s = 0;
  double ack_time_s = 0;

  double wset(double phi) const { return local * (1 - phi) * (1 - phi) + remote * phi * phi + ack * phi; }
  double time(double phi) const { return std::max((1 - phi) * local_time_s, phi * remote_time_s + ack_time_s); }
};

inline ModeProfile mode_profile(Mode mode, const TaskSpec& task, const DeviceProfile& dev, const ChannelState& ch,
                                const QuantumHardwareParams& qhw) {
  ModeProfile p;
  p.mode = mode;
  p.local_time_s = local_time(task, 0.0, dev);
  p.local = dev.weight_time * p.local_time_s + dev.weight_energy * local_energy(task, 0.0, dev);
  if (mode == Mode::kLocal) return p;

  const double rate = tx_rate(ch, dev.tx_power_w);
  StageTimes full;
  double e_full = 0;
  if (mode == Mode::kCpu) {
    full = cloud_cpu_time(task, 1.0, rate, dev);
    e_full = cloud_cpu_energy(task, 1.0, rate, dev);
  } else {
    full = quantum_time(task, 1.0, rate, qhw);
    e_full = quantum_energy(task, 1.0, rate, dev, qhw);
  }
  const double e_ack = dev.tx_power_w * full.ack_s;
  p.ack_time_s = full.ack_s;
  p.remote_time_s = full.upload_s + full.compute_s;
  p.ack = dev.weight_time * full.ack_s + dev.weight_energy * e_ack;
  p.remote = dev.weight_time * p.remote_time_s + dev.weight_energy * (e_full - e_ack);
  return p;
}

}  // namespace meqc
