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

// Virtual queues and the drift-plus-penalty per-slot scheduler.
//
// Each device keeps a backlog z_m that grows whenever the device falls short
// of the target offload rate. Per slot the scheduler minimises
//
//   V * sum_m wset_m + sum_m z_m * drift_m(phi_m)
//
// which separates across devices. Within a remote mode the weighted cost is a
// convex quadratic in phi (see ModeProfile), so the per-device optimum is the
// quadratic's vertex clamped to the deadline-feasible interval.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "meqc/core_model.hpp"

namespace meqc {

/// How a slot's decision feeds the virtual queue.
enum class QueueRule {
  // Arrival of the target rate only when nothing is offloaded:
  //   z' = max(0, z + delta * [phi == 0] - phi)
  kIndicator,
  // Arrival of the target rate every slot, matching the time-average
  // constraint mean(phi) >= delta directly:
  //   z' = max(0, z + delta - phi)
  kDrift,
};

inline std::string_view queue_rule_name(QueueRule r) { return r == QueueRule::kDrift ? "drift" : "indicator"; }

struct VirtualQueueState {
  std::vector<double> backlog;
  double target_rate = 0;
  std::uint64_t slot = 0;

  static VirtualQueueState zeros(std::size_t devices, double target_rate) {
    return {std::vector<double>(devices, 0.0), target_rate, 0};
  }
};

struct DppConfig {
  double v_param = 10;
  double c_additive = 0;
  QueueRule rule = QueueRule::kIndicator;
  // Smallest non-zero offloading fraction a remote decision may use.
  double min_offload = 1e-4;
};

/// Per-slot constraint increment of one device.
inline double constraint_drift(double phi, double delta, QueueRule rule = QueueRule::kIndicator) {
  const double arrival = (rule == QueueRule::kDrift || phi == 0.0) ? delta : 0.0;
  return arrival - phi;
}

inline double queue_update(double z, double phi, double delta, QueueRule rule = QueueRule::kIndicator) {
  return std::max(0.0, z + constraint_drift(phi, delta, rule));
}

/// Advances every backlog by one slot.
inline void advance_queues(VirtualQueueState& q, std::span<const double> phis, QueueRule rule) {
  assert(phis.size() == q.backlog.size());
  for (std::size_t m = 0; m < phis.size(); ++m) q.backlog[m] = queue_update(q.backlog[m], phis[m], q.target_rate, rule);
  ++q.slot;
}

inline double dpp_objective(std::span<const double> costs, std::span<const double> phis,
                            const VirtualQueueState& queues, const DppConfig& cfg) {
  assert(costs.size() == phis.size() && phis.size() == queues.backlog.size());
  double cost_sum = 0;
  double queue_term = 0;
  for (std::size_t m = 0; m < costs.size(); ++m) {
    cost_sum += costs[m];
    queue_term += queues.backlog[m] * constraint_drift(phis[m], queues.target_rate, cfg.rule);
  }
  return cfg.v_param * cost_sum + queue_term;
}

/// Bit set of modes a solver may choose from.
struct ModeMask {
  unsigned bits = 0b111;
  static constexpr ModeMask all() { return {0b111}; }
  static constexpr ModeMask only(Mode server) { return {1u | (1u << static_cast<int>(server))}; }
  static constexpr ModeMask just(Mode m) { return {1u << static_cast<int>(m)}; }
  constexpr bool has(Mode m) const { return (bits >> static_cast<int>(m)) & 1u; }
};

/// Inputs for one device's slot decision.
struct DeviceSlot {
  const TaskSpec& task;
  const DeviceProfile& dev;
  const ChannelState& ch;
  const QuantumHardwareParams& qhw;
  const QecParams& qec;
};

struct DeviceSolution {
  Decision decision;
  CostBreakdown cost;
  double objective = 0;
};

struct SlotSolution {
  std::vector<Decision> decisions;
  std::vector<CostBreakdown> costs;
  double objective = 0;
  std::vector<double> per_device_objective;
};

/// Closed interval of offloading fractions meeting the deadline in a remote
/// mode; empty when lo > hi.
struct PhiInterval {
  double lo = 1;
  double hi = 0;
  bool empty() const { return lo > hi; }
};

inline PhiInterval feasible_interval(const ModeProfile& p, double deadline_s, double min_offload) {
  const double budget = deadline_s * (1.0 + kDeadlineTolerance);
  PhiInterval iv;
  iv.lo = std::max({0.0, min_offload, 1.0 - budget / p.local_time_s});
  iv.hi = std::min(1.0, (budget - p.ack_time_s) / p.remote_time_s);
  return iv;
}

namespace detail {

struct Candidate {
  Decision decision;
  CostBreakdown cost;
  double objective = 0;
};

inline bool objective_ties(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// True when `c` should replace `best` under (objective, phi, mode) ordering.
inline bool better(const Candidate& c, const Candidate& best) {
  if (!objective_ties(c.objective, best.objective)) return c.objective < best.objective;
  if (c.decision.phi != best.decision.phi) return c.decision.phi < best.decision.phi;
  return static_cast<int>(c.decision.mode()) < static_cast<int>(best.decision.mode());
}

// Walks phi towards the interior until the evaluated cost meets the deadline;
// only rounding at an interval end can make the closed-form point miss it.
inline double settle_inside(double phi, const PhiInterval& iv, const DeviceSlot& s, Mode mode) {
  for (int i = 0; i < 64; ++i) {
    const CostBreakdown c = evaluate(Decision::remote(mode, phi), s.task, s.dev, s.ch, s.qhw, s.qec);
    if (within_deadline(c.time_s, s.task.deadline_s)) break;
    const double mid = 0.5 * (iv.lo + iv.hi);
    phi = phi < mid ? std::nextafter(phi, 2.0) : std::nextafter(phi, -1.0);
  }
  return phi;
}

}  // namespace detail

/// Exact minimiser of V * wset + z * drift for one device over the allowed
/// modes. When no allowed decision meets the deadline, the decision with the
/// smallest completion time is returned and flagged infeasible.
inline DeviceSolution solve_device(const DeviceSlot& s, double backlog, double delta, const DppConfig& cfg,
                                   ModeMask allowed = ModeMask::all()) {
  const double v = cfg.v_param;
  auto make = [&](Decision d) {
    detail::Candidate c;
    c.decision = d;
    c.cost = evaluate(d, s.task, s.dev, s.ch, s.qhw, s.qec);
    c.objective = v * c.cost.wset + backlog * constraint_drift(d.phi, delta, cfg.rule);
    return c;
  };

  bool have = false;
  detail::Candidate best;
  auto offer = [&](const detail::Candidate& c) {
    if (!c.cost.feasible) return;
    if (!have || detail::better(c, best)) {
      best = c;
      have = true;
    }
  };

  if (allowed.has(Mode::kLocal)) offer(make(Decision::local()));
  const bool qpu_ok = quantum_feasible(s.task, s.dev, s.qec);
  for (Mode mode : {Mode::kCpu, Mode::kQpu}) {
    if (!allowed.has(mode) || (mode == Mode::kQpu && !qpu_ok)) continue;
    const ModeProfile p = mode_profile(mode, s.task, s.dev, s.ch, s.qhw);
    const PhiInterval iv = feasible_interval(p, s.task.deadline_s, cfg.min_offload);
    if (iv.empty()) continue;
    // d/dphi [V * wset(phi) - z * phi] = 0
    const double vertex = (2 * v * p.local - v * p.ack + backlog) / (2 * v * (p.local + p.remote));
    const double phi = detail::settle_inside(std::clamp(vertex, iv.lo, iv.hi), iv, s, mode);
    offer(make(Decision::remote(mode, phi)));
  }
  if (have) return {best.decision, best.cost, best.objective};

  // Nothing meets the deadline: minimise completion time instead.
  bool any = false;
  detail::Candidate fallback;
  auto consider = [&](const detail::Candidate& c) {
    if (!any || c.cost.time_s < fallback.cost.time_s ||
        (c.cost.time_s == fallback.cost.time_s && detail::better(c, fallback))) {
      fallback = c;
      any = true;
    }
  };
  if (allowed.has(Mode::kLocal)) consider(make(Decision::local()));
  for (Mode mode : {Mode::kCpu, Mode::kQpu}) {
    if (!allowed.has(mode) || (mode == Mode::kQpu && !qpu_ok)) continue;
    const ModeProfile p = mode_profile(mode, s.task, s.dev, s.ch, s.qhw);
    const double balance = (p.local_time_s - p.ack_time_s) / (p.local_time_s + p.remote_time_s);
    consider(make(Decision::remote(mode, std::clamp(balance, cfg.min_offload, 1.0))));
  }
  if (!any) {
    // Only reachable when the mask admits nothing but an unavailable QPU.
    consider(make(Decision::local()));
  }
  fallback.cost.feasible = false;
  return {fallback.decision, fallback.cost, fallback.objective};
}

/// Solves the separable per-slot problem for every device.
inline SlotSolution solve_slot(std::span<const TaskSpec> tasks, std::span<const DeviceProfile> devices,
                               std::span<const ChannelState> channels, const QuantumHardwareParams& qhw,
                               const QecParams& qec, const VirtualQueueState& queues, const DppConfig& cfg) {
  assert(tasks.size() == devices.size() && devices.size() == channels.size());
  assert(queues.backlog.size() == tasks.size());
  SlotSolution out;
  const std::size_t n = tasks.size();
  out.decisions.reserve(n);
  out.costs.reserve(n);
  out.per_device_objective.reserve(n);
  for (std::size_t m = 0; m < n; ++m) {
    const DeviceSlot s{tasks[m], devices[m], channels[m], qhw, qec};
    const DeviceSolution d = solve_device(s, queues.backlog[m], queues.target_rate, cfg);
    out.decisions.push_back(d.decision);
    out.costs.push_back(d.cost);
    out.per_device_objective.push_back(d.objective);
    out.objective += d.objective;
  }
  return out;
}

/// Per-slot bound on half the summed squared constraint increments.
inline double drift_bound(std::int64_t num_devices, double delta) {
  const double span = std::max(delta, 1.0);
  return 0.5 * static_cast<double>(num_devices) * span * span;
}

struct GapCheck {
  double gap = 0;
  double bound_value = 0;
  bool holds = false;
};

/// |average cost - optimum| against (B + C) / V.
inline GapCheck optimality_gap(double avg_cost, double opt_cost, double bound, double c_additive, double v_param) {
  GapCheck g;
  g.gap = std::abs(avg_cost - opt_cost);
  g.bound_value = (bound + c_additive) / v_param;
  g.holds = g.gap <= g.bound_value;
  return g;
}

/// Largest per-device running constraint residual after `tau` slots:
/// max_m (1/tau) * sum_{r<tau} drift_m(phi_m[r]). Positive values mean the
/// device is still behind the target offload rate.
inline double convergence_probe(std::span<const std::vector<double>> phi_history, std::size_t tau, double delta,
                                QueueRule rule = QueueRule::kIndicator) {
  assert(tau >= 1 && tau <= phi_history.size());
  const std::size_t devices = phi_history.front().size();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < devices; ++m) {
    double sum = 0;
    for (std::size_t r = 0; r < tau; ++r) sum += constraint_drift(phi_history[r][m], delta, rule);
    worst = std::max(worst, sum / static_cast<double>(tau));
  }
  return worst;
}

/// Upper bound on the running residual at slot `tau` implied by the
/// quadratic-drift argument with an exact (C-additive) per-slot solver:
///   sqrt((2 (B + C) + 2 V (C_opt - avg_cost)) / tau)
inline double convergence_bound(double bound, double c_additive, double v_param, double avg_cost, double opt_cost,
                                std::size_t tau) {
  const double arg = 2 * (bound + c_additive) + 2 * v_param * (opt_cost - avg_cost);
  return std::sqrt(std::max(arg, 0.0) / static_cast<double>(tau));
}

}  // namespace meqc
