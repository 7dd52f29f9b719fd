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

// Experiment configuration as a single JSON document.
//
// Every field is addressed by a dotted path ("world.tx_power_max_dbm"). The
// same path table drives loading, saving, validation messages and sweeps.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"
#include "meqc/core_model.hpp"
#include "meqc/dqn.hpp"
#include "meqc/environment.hpp"
#include "meqc/lyapunov.hpp"
#include "meqc/policies.hpp"

namespace meqc {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kMissingFile, kMalformed, kUnknownKey, kWrongType, kInvalidValue };

  ConfigError(Kind kind, std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), kind_(kind), key_(std::move(key)) {}

  Kind kind() const { return kind_; }
  const std::string& key() const { return key_; }

 private:
  Kind kind_;
  std::string key_;
};

struct SweepSpec {
  std::string path;
  std::vector<double> values;
};

struct ExperimentConfig {
  WorldConfig world;
  TaskGenConfig taskgen;
  QuantumHardwareParams quantum = default_quantum();
  QecParams qec = {1e-3, 1e-2, 1};
  DppConfig dpp;
  double target_rate = 0.7;
  std::string policy = "lyapunov-exact";
  DqnHyper dqn;
  std::int64_t horizon_slots = 500;
  std::int64_t epochs = 350;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::optional<SweepSpec> sweep;

  // Placeholder gate timings and powers of a surface-code style device.
  static QuantumHardwareParams default_quantum() {
    QuantumHardwareParams q;
    q.t_1qb_s = 1e-13;
    q.t_2qb_s = 4e-13;
    q.t_meas_s = 5e-13;
    q.p_1qb_w = 5e-12;
    q.p_2qb_w = 1e-11;
    q.p_meas_w = 1e-11;
    q.p_qubit_w = 5.7e-12;
    q.n_1qb = 10;
    q.n_2qb = 5;
    q.n_meas = 2;
    q.phys_per_logical = 49;
    return q;
  }
};

namespace detail {

template <class E>
struct EnumNames;

template <>
struct EnumNames<QueueRule> {
  static constexpr std::pair<QueueRule, const char*> table[] = {{QueueRule::kIndicator, "indicator"},
                                                                {QueueRule::kDrift, "drift"}};
};

template <>
struct EnumNames<OptimizerKind> {
  static constexpr std::pair<OptimizerKind, const char*> table[] = {{OptimizerKind::kAdam, "adam"},
                                                                    {OptimizerKind::kSgd, "sgd"}};
};

/// Calls `f(path, field)` for every configurable field, in schema order.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
  auto& w = c.world;
  f("world.cell_radius_m", w.cell_radius_m);
  f("world.num_devices", w.num_devices);
  f("world.bandwidth_hz", w.bandwidth_hz);
  f("world.pathloss_exponent", w.pathloss_exponent);
  f("world.pathloss_ref_db", w.pathloss_ref_db);
  f("world.shadowing_sigma_db", w.shadowing_sigma_db);
  f("world.fading", w.fading);
  f("world.noise_power_dbm", w.noise_power_dbm);
  f("world.rng_seed", w.rng_seed);
  f("world.tx_power_min_dbm", w.tx_power_min_dbm);
  f("world.tx_power_max_dbm", w.tx_power_max_dbm);
  f("world.cpu_hz_choices", w.cpu_hz_choices);
  f("world.leased_cpu_hz_min", w.leased_cpu_hz_min);
  f("world.leased_cpu_hz_max", w.leased_cpu_hz_max);
  f("world.leased_qubits_min", w.leased_qubits_min);
  f("world.leased_qubits_max", w.leased_qubits_max);
  f("world.switched_cap_rho", w.switched_cap_rho);
  f("world.exponent_zeta", w.exponent_zeta);
  f("world.server_switched_cap_rho", w.server_switched_cap_rho);
  f("world.weight_time", w.weight_time);
  f("world.weight_energy", w.weight_energy);
  f("world.mean_speed_min", w.mean_speed_min);
  f("world.mean_speed_max", w.mean_speed_max);
  f("world.mobility_memory", w.mobility_memory);

  auto& t = c.taskgen;
  f("taskgen.amino_min", t.amino_min);
  f("taskgen.amino_max", t.amino_max);
  f("taskgen.datasize_min_mb", t.datasize_min_mb);
  f("taskgen.datasize_max_mb", t.datasize_max_mb);
  f("taskgen.cycles_per_bit_min", t.cycles_per_bit_min);
  f("taskgen.cycles_per_bit_max", t.cycles_per_bit_max);
  f("taskgen.deadline_min_s", t.deadline_min_s);
  f("taskgen.deadline_max_s", t.deadline_max_s);
  f("taskgen.depth_min", t.depth_min);
  f("taskgen.depth_max", t.depth_max);
  f("taskgen.ack_mb", t.ack_mb);

  auto& q = c.quantum;
  f("quantum.t_1qb_s", q.t_1qb_s);
  f("quantum.t_2qb_s", q.t_2qb_s);
  f("quantum.t_meas_s", q.t_meas_s);
  f("quantum.p_1qb_w", q.p_1qb_w);
  f("quantum.p_2qb_w", q.p_2qb_w);
  f("quantum.p_meas_w", q.p_meas_w);
  f("quantum.p_qubit_w", q.p_qubit_w);
  f("quantum.n_1qb", q.n_1qb);
  f("quantum.n_2qb", q.n_2qb);
  f("quantum.n_meas", q.n_meas);
  f("quantum.phys_per_logical", q.phys_per_logical);
  f("quantum.err_rate", c.qec.err_rate);
  f("quantum.err_threshold", c.qec.err_threshold);
  f("quantum.concat_level", c.qec.concat_level);

  f("dpp.v_param", c.dpp.v_param);
  f("dpp.c_additive", c.dpp.c_additive);
  f("dpp.target_rate", c.target_rate);
  f("dpp.queue_rule", c.dpp.rule);
  f("dpp.min_offload", c.dpp.min_offload);

  auto& d = c.dqn;
  f("dqn.gamma", d.gamma);
  f("dqn.learning_rate", d.learning_rate);
  f("dqn.batch_size", d.batch_size);
  f("dqn.replay_capacity", d.replay_capacity);
  f("dqn.target_sync_every", d.target_sync_every);
  f("dqn.epsilon_start", d.epsilon_start);
  f("dqn.epsilon_end", d.epsilon_end);
  f("dqn.epsilon_decay_steps", d.epsilon_decay_steps);
  f("dqn.hidden", d.hidden);
  f("dqn.optimizer", d.optimizer);
  f("dqn.train_every", d.train_every);
  f("dqn.slots_per_epoch", d.slots_per_epoch);
  f("dqn.observe_backlog", d.observe_backlog);
  f("dqn.backlog_scale", d.backlog_scale);

  f("policy", c.policy);
  f("horizon_slots", c.horizon_slots);
  f("epochs", c.epochs);
  f("seeds", c.seeds);
}

inline nlohmann::json* find_path(nlohmann::json& root, const std::string& path) {
  nlohmann::json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object()) return nullptr;
    auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

inline nlohmann::json& make_path(nlohmann::json& root, const std::string& path) {
  nlohmann::json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    node = &(*node)[part];
    if (dot == std::string::npos) return *node;
    start = dot + 1;
  }
}

[[noreturn]] inline void wrong_type(const std::string& key, const char* expected) {
  throw ConfigError(ConfigError::Kind::kWrongType, key, std::string("expected ") + expected);
}

template <class T>
T read_scalar(const nlohmann::json& j, const std::string& key);

template <>
inline double read_scalar<double>(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) wrong_type(key, "a number");
  return j.get<double>();
}

template <>
inline std::int64_t read_scalar<std::int64_t>(const nlohmann::json& j, const std::string& key) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  wrong_type(key, "an integer");
}

template <>
inline std::uint64_t read_scalar<std::uint64_t>(const nlohmann::json& j, const std::string& key) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) throw ConfigError(ConfigError::Kind::kInvalidValue, key, "must be non-negative");
    return j.get<std::uint64_t>();
  }
  if (j.is_number_float()) {
    const double d = j.get<double>();
    if (d < 0) throw ConfigError(ConfigError::Kind::kInvalidValue, key, "must be non-negative");
    if (std::floor(d) == d && d < 9.0e15) return static_cast<std::uint64_t>(d);
  }
  wrong_type(key, "a non-negative integer");
}

template <>
inline int read_scalar<int>(const nlohmann::json& j, const std::string& key) {
  const std::int64_t v = read_scalar<std::int64_t>(j, key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(ConfigError::Kind::kInvalidValue, key, "out of range");
  return static_cast<int>(v);
}

template <>
inline bool read_scalar<bool>(const nlohmann::json& j, const std::string& key) {
  if (!j.is_boolean()) wrong_type(key, "a boolean");
  return j.get<bool>();
}

template <>
inline std::string read_scalar<std::string>(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) wrong_type(key, "a string");
  return j.get<std::string>();
}

template <class T>
void read_field(const nlohmann::json& j, const std::string& key, T& out) {
  if constexpr (std::is_enum_v<T>) {
    const std::string s = read_scalar<std::string>(j, key);
    for (const auto& [value, name] : EnumNames<T>::table) {
      if (s == name) {
        out = value;
        return;
      }
    }
    std::string names;
    for (const auto& [value, name] : EnumNames<T>::table) names += std::string(names.empty() ? "" : ", ") + name;
    throw ConfigError(ConfigError::Kind::kInvalidValue, key, "expected one of " + names);
  } else if constexpr (std::is_same_v<T, std::optional<double>>) {
    if (j.is_null()) {
      out.reset();
    } else {
      out = read_scalar<double>(j, key);
    }
  } else if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>) {
    if (!j.is_array()) wrong_type(key, "an array");
    T v;
    for (std::size_t i = 0; i < j.size(); ++i)
      v.push_back(read_scalar<typename T::value_type>(j[i], key + "[" + std::to_string(i) + "]"));
    out = std::move(v);
  } else {
    out = read_scalar<T>(j, key);
  }
}

template <class T>
nlohmann::json write_field(const T& v) {
  if constexpr (std::is_enum_v<T>) {
    for (const auto& [value, name] : EnumNames<T>::table)
      if (value == v) return name;
    return nullptr;
  } else if constexpr (std::is_same_v<T, std::optional<double>>) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  } else {
    return nlohmann::json(v);
  }
}

inline void collect_unknown(const nlohmann::json& node, const std::string& prefix,
                            const std::map<std::string, bool>& known, std::vector<std::string>& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (known.count(path)) continue;
    if (known.count("#" + path) && it->is_object()) {
      collect_unknown(*it, path, known, out);
      continue;
    }
    out.push_back(path);
  }
}

[[noreturn]] inline void invalid(const std::string& key, const std::string& what) {
  throw ConfigError(ConfigError::Kind::kInvalidValue, key, what);
}

}  // namespace detail

/// Checks every value constraint; throws ConfigError naming the first
/// offending key.
inline void validate(const ExperimentConfig& c) {
  using detail::invalid;
  auto positive = [](const char* key, double v) {
    if (!(v > 0) || !std::isfinite(v)) invalid(key, "must be positive");
  };
  auto non_negative = [](const char* key, double v) {
    if (!(v >= 0) || !std::isfinite(v)) invalid(key, "must be non-negative");
  };
  auto unit = [](const char* key, double v) {
    if (!(v >= 0 && v <= 1)) invalid(key, "must lie in [0, 1]");
  };
  auto ordered = [](const char* key, double lo, double hi) {
    if (lo > hi) invalid(key, "must not be below the matching minimum");
  };

  const auto& w = c.world;
  positive("world.cell_radius_m", w.cell_radius_m);
  if (w.num_devices < 1) invalid("world.num_devices", "must be at least 1");
  positive("world.bandwidth_hz", w.bandwidth_hz);
  positive("world.pathloss_exponent", w.pathloss_exponent);
  if (!std::isfinite(w.pathloss_ref_db)) invalid("world.pathloss_ref_db", "must be finite");
  non_negative("world.shadowing_sigma_db", w.shadowing_sigma_db);
  if (!std::isfinite(w.noise_power_dbm)) invalid("world.noise_power_dbm", "must be finite");
  if (!std::isfinite(w.tx_power_min_dbm)) invalid("world.tx_power_min_dbm", "must be finite");
  if (!std::isfinite(w.tx_power_max_dbm)) invalid("world.tx_power_max_dbm", "must be finite");
  ordered("world.tx_power_max_dbm", w.tx_power_min_dbm, w.tx_power_max_dbm);
  if (w.cpu_hz_choices.empty()) invalid("world.cpu_hz_choices", "must not be empty");
  for (double f : w.cpu_hz_choices) positive("world.cpu_hz_choices", f);
  positive("world.leased_cpu_hz_min", w.leased_cpu_hz_min);
  ordered("world.leased_cpu_hz_max", w.leased_cpu_hz_min, w.leased_cpu_hz_max);
  if (w.leased_qubits_min < 1) invalid("world.leased_qubits_min", "must be at least 1");
  ordered("world.leased_qubits_max", static_cast<double>(w.leased_qubits_min), static_cast<double>(w.leased_qubits_max));
  positive("world.switched_cap_rho", w.switched_cap_rho);
  if (!(w.exponent_zeta >= 2)) invalid("world.exponent_zeta", "must be at least 2");
  if (w.server_switched_cap_rho) positive("world.server_switched_cap_rho", *w.server_switched_cap_rho);
  unit("world.weight_time", w.weight_time);
  unit("world.weight_energy", w.weight_energy);
  non_negative("world.mean_speed_min", w.mean_speed_min);
  ordered("world.mean_speed_max", w.mean_speed_min, w.mean_speed_max);
  unit("world.mobility_memory", w.mobility_memory);

  const auto& t = c.taskgen;
  if (t.amino_min < 1) invalid("taskgen.amino_min", "must be at least 1");
  ordered("taskgen.amino_max", static_cast<double>(t.amino_min), static_cast<double>(t.amino_max));
  positive("taskgen.datasize_min_mb", t.datasize_min_mb);
  ordered("taskgen.datasize_max_mb", t.datasize_min_mb, t.datasize_max_mb);
  positive("taskgen.cycles_per_bit_min", t.cycles_per_bit_min);
  ordered("taskgen.cycles_per_bit_max", t.cycles_per_bit_min, t.cycles_per_bit_max);
  positive("taskgen.deadline_min_s", t.deadline_min_s);
  ordered("taskgen.deadline_max_s", t.deadline_min_s, t.deadline_max_s);
  if (t.depth_min < 1) invalid("taskgen.depth_min", "must be at least 1");
  ordered("taskgen.depth_max", static_cast<double>(t.depth_min), static_cast<double>(t.depth_max));
  positive("taskgen.ack_mb", t.ack_mb);

  const auto& q = c.quantum;
  positive("quantum.t_1qb_s", q.t_1qb_s);
  positive("quantum.t_2qb_s", q.t_2qb_s);
  positive("quantum.t_meas_s", q.t_meas_s);
  positive("quantum.p_1qb_w", q.p_1qb_w);
  positive("quantum.p_2qb_w", q.p_2qb_w);
  positive("quantum.p_meas_w", q.p_meas_w);
  positive("quantum.p_qubit_w", q.p_qubit_w);
  positive("quantum.n_1qb", q.n_1qb);
  positive("quantum.n_2qb", q.n_2qb);
  positive("quantum.n_meas", q.n_meas);
  if (q.phys_per_logical < 1) invalid("quantum.phys_per_logical", "must be at least 1");
  if (!(c.qec.err_rate > 0 && c.qec.err_rate < 1)) invalid("quantum.err_rate", "must lie in (0, 1)");
  if (!(c.qec.err_threshold > 0 && c.qec.err_threshold < 1)) invalid("quantum.err_threshold", "must lie in (0, 1)");
  if (c.qec.concat_level < 0 || c.qec.concat_level > 62) invalid("quantum.concat_level", "must lie in [0, 62]");

  positive("dpp.v_param", c.dpp.v_param);
  non_negative("dpp.c_additive", c.dpp.c_additive);
  unit("dpp.target_rate", c.target_rate);
  if (!(c.dpp.min_offload > 0 && c.dpp.min_offload <= 1)) invalid("dpp.min_offload", "must lie in (0, 1]");

  const auto& d = c.dqn;
  unit("dqn.gamma", d.gamma);
  positive("dqn.learning_rate", d.learning_rate);
  if (d.batch_size < 1) invalid("dqn.batch_size", "must be at least 1");
  if (d.replay_capacity < d.batch_size) invalid("dqn.replay_capacity", "must be at least dqn.batch_size");
  unit("dqn.epsilon_start", d.epsilon_start);
  unit("dqn.epsilon_end", d.epsilon_end);
  if (d.hidden.empty()) invalid("dqn.hidden", "must not be empty");
  for (int h : d.hidden)
    if (h < 1) invalid("dqn.hidden", "layer widths must be at least 1");
  if (d.slots_per_epoch < 1) invalid("dqn.slots_per_epoch", "must be at least 1");
  positive("dqn.backlog_scale", d.backlog_scale);

  if (!parse_policy(c.policy)) invalid("policy", "unknown policy name");
  if (c.horizon_slots < 1) invalid("horizon_slots", "must be at least 1");
  if (c.epochs < 1) invalid("epochs", "must be at least 1");
  if (c.seeds.empty()) invalid("seeds", "must not be empty");
  if (c.sweep) {
    if (c.sweep->values.empty()) invalid("sweep.values", "must not be empty");
    for (double v : c.sweep->values)
      if (!std::isfinite(v)) invalid("sweep.values", "must be finite");
  }
}

/// Every dotted path accepted by the configuration.
inline std::vector<std::string> config_paths() {
  std::vector<std::string> out;
  ExperimentConfig c;
  detail::visit_fields(c, [&](const char* path, auto&) { out.emplace_back(path); });
  return out;
}

/// Fills `base` from a parsed document; absent keys keep their values.
inline ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base = {}) {
  if (!doc.is_object()) throw ConfigError(ConfigError::Kind::kMalformed, "", "top level must be an object");

  std::map<std::string, bool> known;
  detail::visit_fields(base, [&](const char* path, auto&) {
    const std::string p = path;
    known[p] = true;
    for (std::size_t dot = p.find('.'); dot != std::string::npos; dot = p.find('.', dot + 1))
      known["#" + p.substr(0, dot)] = true;
  });
  known["sweep"] = true;
  std::vector<std::string> unknown;
  detail::collect_unknown(doc, "", known, unknown);
  if (!unknown.empty()) throw ConfigError(ConfigError::Kind::kUnknownKey, unknown.front(), "unknown key");

  detail::visit_fields(base, [&](const char* path, auto& field) {
    const nlohmann::json* j = detail::find_path(const_cast<nlohmann::json&>(doc), path);
    if (j) detail::read_field(*j, path, field);
  });

  if (auto it = doc.find("sweep"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) detail::wrong_type("sweep", "an object");
    for (auto kv = it->begin(); kv != it->end(); ++kv)
      if (kv.key() != "path" && kv.key() != "values")
        throw ConfigError(ConfigError::Kind::kUnknownKey, "sweep." + kv.key(), "unknown key");
    SweepSpec s;
    if (!it->contains("path")) throw ConfigError(ConfigError::Kind::kInvalidValue, "sweep.path", "missing");
    if (!it->contains("values")) throw ConfigError(ConfigError::Kind::kInvalidValue, "sweep.values", "missing");
    s.path = detail::read_scalar<std::string>(it->at("path"), "sweep.path");
    detail::read_field(it->at("values"), "sweep.values", s.values);
    base.sweep = std::move(s);
  }
  validate(base);
  return base;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json doc = nlohmann::json::object();
  detail::visit_fields(c, [&](const char* path, const auto& field) {
    detail::make_path(doc, path) = detail::write_field(field);
  });
  if (c.sweep) doc["sweep"] = {{"path", c.sweep->path}, {"values", c.sweep->values}};
  return doc;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::kMalformed, "", e.what());
  }
  return config_from_json(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(ConfigError::Kind::kMissingFile, "", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& c) { return config_to_json(c).dump(2) + "\n"; }

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return config_to_json(a) == config_to_json(b);
}

/// Paths that set several fields at once, for sweeping a fixed value.
inline const std::map<std::string, std::vector<std::string>>& sweep_aliases() {
  static const std::map<std::string, std::vector<std::string>> aliases = {
      {"taskgen.datasize_mb", {"taskgen.datasize_min_mb", "taskgen.datasize_max_mb"}},
      {"world.leased_qubits", {"world.leased_qubits_min", "world.leased_qubits_max"}},
      {"world.tx_power_dbm", {"world.tx_power_min_dbm", "world.tx_power_max_dbm"}},
  };
  return aliases;
}

/// Returns a copy of `c` with the numeric field at `path` set to `value`.
inline ExperimentConfig with_parameter(const ExperimentConfig& c, const std::string& path, double value) {
  const auto& aliases = sweep_aliases();
  std::vector<std::string> targets = {path};
  if (auto it = aliases.find(path); it != aliases.end()) targets = it->second;

  ExperimentConfig out = c;
  for (const std::string& target : targets) {
    bool found = false;
    detail::visit_fields(out, [&](const char* p, auto& field) {
      using T = std::decay_t<decltype(field)>;
      if (target != p) return;
      found = true;
      if constexpr (std::is_same_v<T, double> || std::is_same_v<T, std::optional<double>>) {
        field = value;
      } else if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, std::uint64_t> ||
                           std::is_same_v<T, int>) {
        if (std::floor(value) != value) detail::invalid(path, "sweep value must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (value < 0) detail::invalid(path, "sweep value must be non-negative");
        }
        field = static_cast<T>(value);
      } else {
        detail::invalid(path, "not a numeric field");
      }
    });
    if (!found) {
      std::string valid;
      for (const auto& [alias, unused] : aliases) valid += (valid.empty() ? "" : ", ") + alias;
      detail::visit_fields(out, [&](const char* p, auto& field) {
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) valid += std::string(", ") + p;
      });
      throw ConfigError(ConfigError::Kind::kUnknownKey, path, "unknown sweep parameter; valid paths: " + valid);
    }
  }
  validate(out);
  return out;
}

}  // namespace meqc
