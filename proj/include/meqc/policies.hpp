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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meqc/core_model.hpp"
#include "meqc/dqn.hpp"
#include "meqc/environment.hpp"
#include "meqc/lyapunov.hpp"

namespace meqc {

enum class PolicyKind {
  kRandom,
  kCpuDiscrete,
  kQpuDiscrete,
  kCpuContinuous,
  kQpuContinuous,
  kLocalOnly,
  kLyapunovExact,
  kDqn,
};

inline constexpr std::array<PolicyKind, 8> kAllPolicies = {
    PolicyKind::kRandom,        PolicyKind::kCpuDiscrete, PolicyKind::kQpuDiscrete,   PolicyKind::kCpuContinuous,
    PolicyKind::kQpuContinuous, PolicyKind::kLocalOnly,   PolicyKind::kLyapunovExact, PolicyKind::kDqn,
};

inline std::string_view policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kCpuDiscrete: return "cpu-discrete";
    case PolicyKind::kQpuDiscrete: return "qpu-discrete";
    case PolicyKind::kCpuContinuous: return "cpu-continuous";
    case PolicyKind::kQpuContinuous: return "qpu-continuous";
    case PolicyKind::kLocalOnly: return "local-only";
    case PolicyKind::kLyapunovExact: return "lyapunov-exact";
    case PolicyKind::kDqn: return "dqn";
  }
  return "?";
}

inline std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (PolicyKind k : kAllPolicies)
    if (policy_name(k) == name) return k;
  return std::nullopt;
}

/// Everything a policy may look at when deciding one slot.
struct SlotContext {
  std::span<const TaskSpec> tasks;
  std::span<const DeviceProfile> devices;
  std::span<const ChannelState> channels;
  const QuantumHardwareParams& qhw;
  const QecParams& qec;
  const VirtualQueueState& queues;
  const DppConfig& dpp;

  std::size_t size() const { return tasks.size(); }
  DeviceSlot device(std::size_t m) const { return {tasks[m], devices[m], channels[m], qhw, qec}; }
};

/// Modes a device may use this slot: local and CPU always, QPU when the
/// circuit fits the leased qubits and clears the success threshold.
inline FeasibleModes feasible_modes(const TaskSpec& task, const DeviceProfile& dev, const QecParams& qec) {
  return {true, true, quantum_feasible(task, dev, qec)};
}

struct Observation {
  double leased_cpu_hz = 0;
  double cycles_per_bit = 0;
  TaskSpec task;
  double gain = 0;
  double cpu_hz = 0;
  double backlog = 0;
};

inline Observation observe(const SlotContext& ctx, std::size_t m) {
  return {ctx.devices[m].leased_cpu_hz, ctx.tasks[m].cycles_per_bit, ctx.tasks[m], ctx.channels[m].gain,
          ctx.devices[m].cpu_hz, ctx.queues.backlog[m]};
}

/// Min-max scaling of observations into [0, 1] using the configured world
/// ranges. Channel gain is scaled in dB.
class ObservationScaler {
 public:
  ObservationScaler() = default;
  ObservationScaler(const WorldConfig& w, const TaskGenConfig& t, bool with_backlog, double backlog_scale)
      : with_backlog_(with_backlog), backlog_scale_(backlog_scale) {
    leased_ = {w.leased_cpu_hz_min, w.leased_cpu_hz_max};
    cycles_ = {t.cycles_per_bit_min, t.cycles_per_bit_max};
    data_ = {megabits_to_bits(t.datasize_min_mb), megabits_to_bits(t.datasize_max_mb)};
    deadline_ = {t.deadline_min_s, t.deadline_max_s};
    qubits_ = {static_cast<double>(t.amino_min), static_cast<double>(t.amino_max)};
    depth_ = {static_cast<double>(t.depth_min), static_cast<double>(t.depth_max)};
    const auto [fmin, fmax] = std::minmax_element(w.cpu_hz_choices.begin(), w.cpu_hz_choices.end());
    cpu_ = {*fmin, *fmax};
    // Three shadowing deviations either side plus a fading margin.
    const double spread = 3 * w.shadowing_sigma_db + (w.fading ? 20.0 : 0.0);
    gain_db_ = {-pathloss_db(w.cell_radius_m, w) - spread, -w.pathloss_ref_db + spread};
  }

  int dim() const { return with_backlog_ ? 9 : 8; }

  Eigen::VectorXd encode(const Observation& o) const {
    Eigen::VectorXd v(dim());
    v(0) = scale(o.leased_cpu_hz, leased_);
    v(1) = scale(o.cycles_per_bit, cycles_);
    v(2) = scale(o.task.data_bits, data_);
    v(3) = scale(o.task.deadline_s, deadline_);
    v(4) = scale(static_cast<double>(o.task.circuit_qubits), qubits_);
    v(5) = scale(static_cast<double>(o.task.circuit_depth), depth_);
    v(6) = scale(o.gain > 0 ? linear_to_db(o.gain) : gain_db_.first, gain_db_);
    v(7) = scale(o.cpu_hz, cpu_);
    if (with_backlog_) v(8) = std::clamp(o.backlog / backlog_scale_, 0.0, 1.0);
    return v;
  }

 private:
  using Range = std::pair<double, double>;
  static double scale(double x, const Range& r) {
    if (!(r.second > r.first)) return 0.0;
    return std::clamp((x - r.first) / (r.second - r.first), 0.0, 1.0);
  }

  bool with_backlog_ = true;
  double backlog_scale_ = 10;
  Range leased_, cycles_, data_, deadline_, qubits_, depth_, cpu_, gain_db_;
};

/// Best of {all local, all offloaded to `server`} by instantaneous cost.
inline Decision discrete_choice(const DeviceSlot& s, Mode server) {
  const Decision local = Decision::local();
  const CostBreakdown lc = evaluate(local, s.task, s.dev, s.ch, s.qhw, s.qec);
  if (server == Mode::kQpu && !quantum_feasible(s.task, s.dev, s.qec)) return local;
  const Decision full = Decision::remote(server, 1.0);
  const CostBreakdown fc = evaluate(full, s.task, s.dev, s.ch, s.qhw, s.qec);
  if (lc.feasible != fc.feasible) return lc.feasible ? local : full;
  if (lc.feasible) return fc.wset < lc.wset ? full : local;
  return fc.time_s < lc.time_s ? full : local;
}

/// Instantaneous-cost optimum over {local} and the given server's
/// deadline-feasible fractions.
inline Decision continuous_choice(const DeviceSlot& s, Mode server, const DppConfig& dpp) {
  DppConfig plain = dpp;
  plain.v_param = 1.0;
  return solve_device(s, 0.0, 0.0, plain, ModeMask::only(server)).decision;
}

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  virtual std::vector<Decision> decide(const SlotContext& ctx) = 0;
};

class BaselinePolicy final : public Policy {
 public:
  BaselinePolicy(PolicyKind kind, std::uint64_t seed) : kind_(kind), rng_(seed) {}

  PolicyKind kind() const override { return kind_; }

  std::vector<Decision> decide(const SlotContext& ctx) override {
    if (kind_ == PolicyKind::kLyapunovExact)
      return solve_slot(ctx.tasks, ctx.devices, ctx.channels, ctx.qhw, ctx.qec, ctx.queues, ctx.dpp).decisions;
    std::vector<Decision> out;
    out.reserve(ctx.size());
    for (std::size_t m = 0; m < ctx.size(); ++m) out.push_back(decide_one(ctx, m));
    return out;
  }

 private:
  Decision decide_one(const SlotContext& ctx, std::size_t m) {
    const DeviceSlot s = ctx.device(m);
    switch (kind_) {
      case PolicyKind::kLocalOnly: return Decision::local();
      case PolicyKind::kCpuDiscrete: return discrete_choice(s, Mode::kCpu);
      case PolicyKind::kQpuDiscrete: return discrete_choice(s, Mode::kQpu);
      case PolicyKind::kCpuContinuous: return continuous_choice(s, Mode::kCpu, ctx.dpp);
      case PolicyKind::kQpuContinuous: return continuous_choice(s, Mode::kQpu, ctx.dpp);
      case PolicyKind::kRandom: {
        const FeasibleModes ok = feasible_modes(s.task, s.dev, s.qec);
        const std::int64_t n = ok[2] ? 3 : 2;
        const auto mode = static_cast<Mode>(uniform_int(rng_, 0, n - 1));
        if (mode == Mode::kLocal) return Decision::local();
        // (0, 1]
        const double phi = 1.0 - std::generate_canonical<double, 64>(rng_);
        return Decision::remote(mode, std::max(phi, ctx.dpp.min_offload));
      }
      default: return Decision::local();
    }
  }

  PolicyKind kind_;
  Rng rng_;
};

/// Shared mode-selection network for all devices; the offloading fraction
/// comes from the closed-form per-mode optimiser of the drift-plus-penalty
/// objective.
class DqnAgent {
 public:
  DqnAgent(const DqnHyper& hyper, ObservationScaler scaler, std::uint64_t seed)
      : hyper_(hyper),
        scaler_(std::move(scaler)),
        online_(scaler_.dim(), hyper.hidden, kNumModes, seed),
        target_(online_),
        buffer_(hyper.replay_capacity),
        opt_(online_, hyper.optimizer, hyper.learning_rate),
        rng_(seed ^ 0x9e3779b97f4a7c15ull) {}

  const DqnHyper& hyper() const { return hyper_; }
  const ObservationScaler& scaler() const { return scaler_; }
  const QNetwork& online() const { return online_; }
  QNetwork& online() { return online_; }
  const QNetwork& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  std::size_t steps() const { return steps_; }
  std::size_t updates() const { return updates_; }

  Eigen::VectorXd encode(const SlotContext& ctx, std::size_t m) const { return scaler_.encode(observe(ctx, m)); }

  Mode act(const SlotContext& ctx, std::size_t m, double epsilon) {
    const FeasibleModes ok = feasible_modes(ctx.tasks[m], ctx.devices[m], ctx.qec);
    return dqn_act(online_, encode(ctx, m), ok, epsilon, rng_);
  }

  double exploration() const { return hyper_.epsilon_at(steps_); }

  /// Stores a transition and, on the configured cadence, takes a gradient
  /// step and refreshes the target network.
  std::optional<double> observe_transition(Transition t) {
    buffer_.push(std::move(t));
    ++steps_;
    if (hyper_.train_every == 0 || steps_ % hyper_.train_every != 0) return std::nullopt;
    auto loss = dqn_train_step(buffer_, online_, target_, hyper_, opt_, rng_);
    if (loss) {
      ++updates_;
      if (hyper_.target_sync_every > 0 && updates_ % hyper_.target_sync_every == 0) target_sync(online_, target_);
    }
    return loss;
  }

 private:
  DqnHyper hyper_;
  ObservationScaler scaler_;
  QNetwork online_;
  QNetwork target_;
  ReplayBuffer buffer_;
  Optimizer opt_;
  Rng rng_;
  std::size_t steps_ = 0;
  std::size_t updates_ = 0;
};

/// Offloading fraction for a fixed mode, optimal for the drift-plus-penalty
/// objective given the device's backlog.
inline Decision decision_for_mode(const SlotContext& ctx, std::size_t m, Mode mode) {
  if (mode == Mode::kLocal) return Decision::local();
  return solve_device(ctx.device(m), ctx.queues.backlog[m], ctx.queues.target_rate, ctx.dpp, ModeMask::just(mode))
      .decision;
}

class DqnPolicy final : public Policy {
 public:
  explicit DqnPolicy(std::shared_ptr<DqnAgent> agent) : agent_(std::move(agent)) {}

  PolicyKind kind() const override { return PolicyKind::kDqn; }

  std::vector<Decision> decide(const SlotContext& ctx) override {
    std::vector<Decision> out;
    out.reserve(ctx.size());
    for (std::size_t m = 0; m < ctx.size(); ++m) out.push_back(decision_for_mode(ctx, m, agent_->act(ctx, m, 0.0)));
    return out;
  }

  DqnAgent& agent() { return *agent_; }

 private:
  std::shared_ptr<DqnAgent> agent_;
};

}  // namespace meqc
