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

// Experiment orchestration: seeded runs, DQN training, sweeps and output.

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "meqc/config.hpp"
#include "meqc/core_model.hpp"
#include "meqc/dqn.hpp"
#include "meqc/environment.hpp"
#include "meqc/lyapunov.hpp"
#include "meqc/policies.hpp"

namespace meqc {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finaliser over a pair, used to derive independent streams.
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a * 0x9e3779b97f4a7c15ull + b + 0x632be59bd9b4e019ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace stream {
inline constexpr std::uint64_t kDevices = 0;
inline constexpr std::uint64_t kDynamics = 1;
inline constexpr std::uint64_t kPolicy = 2;
inline constexpr std::uint64_t kNetwork = 3;
inline constexpr std::uint64_t kTraining = 1000;
}  // namespace stream

inline std::uint64_t run_seed(const ExperimentConfig& c, std::uint64_t seed, std::uint64_t which) {
  return derive_seed(derive_seed(c.world.rng_seed, seed), which);
}

struct SlotRecord {
  std::uint64_t slot = 0;
  std::uint64_t device_id = 0;
  std::string policy;
  Mode mode = Mode::kLocal;
  double phi = 0;
  double time_s = 0;
  double energy_j = 0;
  double wset = 0;
  double backlog = 0;
  bool feasible = true;
  std::uint64_t seed = 0;

  bool operator==(const SlotRecord&) const = default;
};

struct RunSummary {
  std::string policy;
  std::uint64_t seed = 0;
  double time_avg_wset = 0;
  std::vector<double> constraint_residual;
  double infeasible_fraction = 0;
  double wall_time_s = 0;

  bool operator==(const RunSummary&) const = default;
};

struct RunResult {
  RunSummary summary;
  std::vector<SlotRecord> records;
};

struct RunOptions {
  bool keep_records = true;
  // Measured wall time makes outputs differ between identical runs, so it is
  // reported only on request.
  bool timing = false;
  // Pre-trained agent for the dqn policy; trained from the config if absent.
  std::shared_ptr<DqnAgent> agent;
};

struct TrainingLog {
  std::vector<double> epoch_mean_wset;
  std::vector<double> losses;
};

inline ObservationScaler make_scaler(const ExperimentConfig& c) {
  return ObservationScaler(c.world, c.taskgen, c.dqn.observe_backlog, c.dqn.backlog_scale);
}

/// Trains a fresh agent for `cfg.epochs` episodes of `dqn.slots_per_epoch`
/// slots. Each episode runs on its own dynamically seeded world hosting the
/// same devices as the evaluation world.
inline std::shared_ptr<DqnAgent> train_dqn(const ExperimentConfig& cfg, std::uint64_t seed,
                                           TrainingLog* log = nullptr) {
  auto agent = std::make_shared<DqnAgent>(cfg.dqn, make_scaler(cfg), run_seed(cfg, seed, stream::kNetwork));
  const std::uint64_t static_seed = run_seed(cfg, seed, stream::kDevices);

  struct Pending {
    Eigen::VectorXd obs;
    int action = 0;
    double reward = 0;
  };

  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    World world(cfg.world, cfg.taskgen, static_seed,
                run_seed(cfg, seed, stream::kTraining + static_cast<std::uint64_t>(epoch)));
    const std::size_t n = world.size();
    VirtualQueueState queues = VirtualQueueState::zeros(n, cfg.target_rate);
    std::vector<std::optional<Pending>> pending(n);
    double total = 0;

    for (std::size_t slot = 0; slot < cfg.dqn.slots_per_epoch; ++slot) {
      const SlotDraw draw = world.draw_slot();
      const SlotContext ctx{draw.tasks, world.devices(), draw.channels, cfg.quantum, cfg.qec, queues, cfg.dpp};
      std::vector<double> phis(n);
      for (std::size_t m = 0; m < n; ++m) {
        Eigen::VectorXd obs = agent->encode(ctx, m);
        if (pending[m]) {
          auto loss = agent->observe_transition({pending[m]->obs, pending[m]->action, pending[m]->reward, obs, false});
          if (loss && log) log->losses.push_back(*loss);
        }
        const Mode mode = agent->act(ctx, m, agent->exploration());
        const Decision d = decision_for_mode(ctx, m, mode);
        const CostBreakdown cost = evaluate(d, draw.tasks[m], world.devices()[m], draw.channels[m], cfg.quantum, cfg.qec);
        pending[m] = Pending{std::move(obs), static_cast<int>(mode), -cost.wset};
        phis[m] = d.phi;
        total += cost.wset;
      }
      advance_queues(queues, phis, cfg.dpp.rule);
      world.advance();
    }
    for (auto& p : pending) {
      if (!p) continue;
      auto loss = agent->observe_transition({p->obs, p->action, p->reward, p->obs, true});
      if (loss && log) log->losses.push_back(*loss);
    }
    if (log) log->epoch_mean_wset.push_back(total / static_cast<double>(cfg.dqn.slots_per_epoch));
  }
  return agent;
}

inline std::unique_ptr<Policy> make_policy(PolicyKind kind, const ExperimentConfig& cfg, std::uint64_t seed,
                                           std::shared_ptr<DqnAgent> agent = nullptr) {
  if (kind == PolicyKind::kDqn) {
    if (!agent) agent = train_dqn(cfg, seed);
    return std::make_unique<DqnPolicy>(std::move(agent));
  }
  return std::make_unique<BaselinePolicy>(kind, run_seed(cfg, seed, stream::kPolicy));
}

/// One seeded evaluation run over `cfg.horizon_slots` slots.
///
/// Per slot: channels and tasks are drawn at the current positions, the
/// policy decides, costs are evaluated, queues advance, records are written
/// with the post-update backlog, and finally every device moves.
inline RunResult run(const ExperimentConfig& cfg, PolicyKind kind, std::uint64_t seed, const RunOptions& opts = {}) {
  const auto started = std::chrono::steady_clock::now();
  auto policy = make_policy(kind, cfg, seed, opts.agent);
  World world(cfg.world, cfg.taskgen, run_seed(cfg, seed, stream::kDevices), run_seed(cfg, seed, stream::kDynamics));
  const std::size_t n = world.size();
  VirtualQueueState queues = VirtualQueueState::zeros(n, cfg.target_rate);
  const std::string name(policy_name(kind));

  RunResult out;
  RunSummary& s = out.summary;
  s.policy = name;
  s.seed = seed;
  const auto horizon = static_cast<std::uint64_t>(cfg.horizon_slots);
  if (opts.keep_records) out.records.reserve(horizon * n);

  std::vector<double> phi_sum(n, 0.0);
  std::uint64_t infeasible = 0;
  double wset_sum = 0;
  std::vector<double> phis(n);
  std::vector<CostBreakdown> costs(n);

  for (std::uint64_t slot = 0; slot < horizon; ++slot) {
    const SlotDraw draw = world.draw_slot();
    const SlotContext ctx{draw.tasks, world.devices(), draw.channels, cfg.quantum, cfg.qec, queues, cfg.dpp};
    const std::vector<Decision> decisions = policy->decide(ctx);
    double slot_wset = 0;
    for (std::size_t m = 0; m < n; ++m) {
      costs[m] = evaluate(decisions[m], draw.tasks[m], world.devices()[m], draw.channels[m], cfg.quantum, cfg.qec);
      phis[m] = decisions[m].phi;
      slot_wset += costs[m].wset;
    }
    advance_queues(queues, phis, cfg.dpp.rule);
    for (std::size_t m = 0; m < n; ++m) {
      phi_sum[m] += phis[m];
      if (!costs[m].feasible) ++infeasible;
      if (opts.keep_records) {
        out.records.push_back({slot, m, name, decisions[m].mode(), phis[m], costs[m].time_s, costs[m].energy_j,
                               costs[m].wset, queues.backlog[m], costs[m].feasible, seed});
      }
    }
    wset_sum += slot_wset;
    world.advance();
  }

  const double h = static_cast<double>(horizon);
  s.time_avg_wset = wset_sum / h;
  s.constraint_residual.resize(n);
  for (std::size_t m = 0; m < n; ++m) s.constraint_residual[m] = cfg.target_rate - phi_sum[m] / h;
  s.infeasible_fraction = static_cast<double>(infeasible) / (h * static_cast<double>(n));
  if (opts.timing) s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

struct SweepRow {
  std::string parameter;
  double value = 0;
  RunSummary summary;

  bool operator==(const SweepRow&) const = default;
};

/// Worker count: hardware concurrency, capped by MEQC_SIM_THREADS.
inline std::size_t sweep_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MEQC_SIM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return n;
}

/// Cartesian product of (value, policy, seed) runs, ordered value-major then
/// policy then seed. The table is identical for every thread count.
inline std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::string& path,
                                   const std::vector<double>& values, const std::vector<PolicyKind>& policies,
                                   const std::vector<std::uint64_t>& seeds, std::size_t threads = 0,
                                   bool timing = false) {
  std::vector<ExperimentConfig> configs;
  configs.reserve(values.size());
  for (double v : values) configs.push_back(with_parameter(cfg, path, v));

  std::vector<SweepRow> rows(values.size() * policies.size() * seeds.size());
  auto job = [&](std::size_t i) {
    const std::size_t si = i % seeds.size();
    const std::size_t pi = (i / seeds.size()) % policies.size();
    const std::size_t vi = i / (seeds.size() * policies.size());
    RunOptions opts;
    opts.keep_records = false;
    opts.timing = timing;
    rows[i] = {path, values[vi], run(configs[vi], policies[pi], seeds[si], opts).summary};
  };

  if (threads == 0) threads = sweep_threads();
  threads = std::min(threads, rows.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) job(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < rows.size(); i = next++) job(i);
    });
  }
  for (auto& th : pool) th.join();
  return rows;
}

// Output ----------------------------------------------------------------------

enum class Format { kCsv, kJsonl };

/// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

inline const char* kRecordHeader = "slot,device_id,policy,mode,phi,time_s,energy_j,wset,backlog,feasible,seed";
inline const char* kSummaryHeader = "policy,seed,time_avg_wset,constraint_residual,infeasible_fraction,wall_time_s";

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
  out << '\n';
}

inline std::vector<std::string> record_fields(const SlotRecord& r) {
  return {format_number(r.slot),   format_number(r.device_id), r.policy,
          std::string(mode_name(r.mode)), format_number(r.phi), format_number(r.time_s),
          format_number(r.energy_j), format_number(r.wset),   format_number(r.backlog),
          r.feasible ? "true" : "false", format_number(r.seed)};
}

inline std::vector<std::string> summary_fields(const RunSummary& s) {
  return {s.policy, format_number(s.seed), format_number(s.time_avg_wset), join_numbers(s.constraint_residual),
          format_number(s.infeasible_fraction), format_number(s.wall_time_s)};
}

inline nlohmann::ordered_json record_json(const SlotRecord& r) {
  return {{"slot", r.slot},         {"device_id", r.device_id}, {"policy", r.policy},
          {"mode", mode_name(r.mode)}, {"phi", r.phi},          {"time_s", r.time_s},
          {"energy_j", r.energy_j}, {"wset", r.wset},           {"backlog", r.backlog},
          {"feasible", r.feasible}, {"seed", r.seed}};
}

inline nlohmann::ordered_json summary_json(const RunSummary& s) {
  return {{"policy", s.policy},
          {"seed", s.seed},
          {"time_avg_wset", s.time_avg_wset},
          {"constraint_residual", s.constraint_residual},
          {"infeasible_fraction", s.infeasible_fraction},
          {"wall_time_s", s.wall_time_s}};
}

inline void emit(std::ostream& out, const std::vector<SlotRecord>& records, Format fmt) {
  if (fmt == Format::kCsv) {
    out << kRecordHeader << '\n';
    for (const auto& r : records) write_csv_row(out, record_fields(r));
  } else {
    for (const auto& r : records) out << record_json(r).dump() << '\n';
  }
}

inline void emit(std::ostream& out, const std::vector<RunSummary>& summaries, Format fmt) {
  if (fmt == Format::kCsv) {
    out << kSummaryHeader << '\n';
    for (const auto& s : summaries) write_csv_row(out, summary_fields(s));
  } else {
    for (const auto& s : summaries) out << summary_json(s).dump() << '\n';
  }
}

inline void emit(std::ostream& out, const std::vector<SweepRow>& rows, Format fmt) {
  if (fmt == Format::kCsv) {
    out << "parameter,value," << kSummaryHeader << '\n';
    for (const auto& row : rows) {
      std::vector<std::string> f = {row.parameter, format_number(row.value)};
      const auto rest = summary_fields(row.summary);
      f.insert(f.end(), rest.begin(), rest.end());
      write_csv_row(out, f);
    }
  } else {
    for (const auto& row : rows) {
      nlohmann::ordered_json j = {{"parameter", row.parameter}, {"value", row.value}};
      for (auto& [k, v] : summary_json(row.summary).items()) j[k] = v;
      out << j.dump() << '\n';
    }
  }
}

template <class T>
void emit(const std::string& path, const std::vector<T>& items, Format fmt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  emit(out, items, fmt);
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

// Input -----------------------------------------------------------------------

/// Splits RFC-4180 text into rows of fields.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

template <class T>
T parse_number(const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw IoError("bad number: " + s);
  return v;
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::kLocal, Mode::kCpu, Mode::kQpu})
    if (mode_name(m) == s) return m;
  throw IoError("bad mode: " + s);
}

}  // namespace detail

inline std::vector<SlotRecord> parse_records_csv(const std::string& text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != parse_csv(std::string(kRecordHeader) + "\n").front())
    throw IoError("missing record header");
  std::vector<SlotRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 11) throw IoError("record row " + std::to_string(i) + " has wrong field count");
    SlotRecord r;
    r.slot = detail::parse_number<std::uint64_t>(f[0]);
    r.device_id = detail::parse_number<std::uint64_t>(f[1]);
    r.policy = f[2];
    r.mode = detail::parse_mode(f[3]);
    r.phi = detail::parse_number<double>(f[4]);
    r.time_s = detail::parse_number<double>(f[5]);
    r.energy_j = detail::parse_number<double>(f[6]);
    r.wset = detail::parse_number<double>(f[7]);
    r.backlog = detail::parse_number<double>(f[8]);
    if (f[9] != "true" && f[9] != "false") throw IoError("bad boolean: " + f[9]);
    r.feasible = f[9] == "true";
    r.seed = detail::parse_number<std::uint64_t>(f[10]);
    out.push_back(std::move(r));
  }
  return out;
}

/// Recomputes the time-average cost from a record stream of one run.
inline double time_average_wset(const std::vector<SlotRecord>& records) {
  if (records.empty()) return 0;
  double total = 0;
  double slot_total = 0;
  std::uint64_t current = records.front().slot;
  std::uint64_t slots = 1;
  for (const auto& r : records) {
    if (r.slot != current) {
      total += slot_total;
      slot_total = 0;
      current = r.slot;
      ++slots;
    }
    slot_total += r.wset;
  }
  total += slot_total;
  return total / static_cast<double>(slots);
}

}  // namespace meqc
