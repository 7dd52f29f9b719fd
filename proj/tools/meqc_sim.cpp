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

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "meqc/config.hpp"
#include "meqc/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> policies;
  std::int64_t slots = 0;
  std::int64_t epochs = 0;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = ".";
  std::string format = "csv";
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON configuration file (defaults when omitted)");
  cmd->add_option("--policy", a.policies, "Policy name, or 'all'; repeatable");
  cmd->add_option("--slots", a.slots, "Evaluation horizon in slots")->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", a.epochs, "DQN training episodes")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seeds, "Run seed; repeatable");
  cmd->add_option("--out", a.out_dir, "Output directory");
  cmd->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_flag("--timing", a.timing, "Report measured wall time");
}

meqc::ExperimentConfig resolve_config(const CommonArgs& a) {
  meqc::ExperimentConfig cfg = a.config_path.empty() ? meqc::ExperimentConfig{} : meqc::load_config(a.config_path);
  if (a.slots > 0) cfg.horizon_slots = a.slots;
  if (a.epochs > 0) cfg.epochs = a.epochs;
  if (!a.seeds.empty()) cfg.seeds = a.seeds;
  meqc::validate(cfg);
  return cfg;
}

std::vector<meqc::PolicyKind> resolve_policies(const CommonArgs& a, const meqc::ExperimentConfig& cfg) {
  std::vector<std::string> names = a.policies;
  if (names.empty()) names.push_back(cfg.policy);
  std::vector<meqc::PolicyKind> out;
  for (const auto& name : names) {
    if (name == "all") {
      out.insert(out.end(), meqc::kAllPolicies.begin(), meqc::kAllPolicies.end());
      continue;
    }
    const auto kind = meqc::parse_policy(name);
    if (!kind) throw meqc::ConfigError(meqc::ConfigError::Kind::kInvalidValue, "policy", "unknown policy " + name);
    out.push_back(*kind);
  }
  return out;
}

std::filesystem::path prepare_out(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw meqc::IoError("cannot create " + dir + ": " + ec.message());
  return dir;
}

int cmd_run(const CommonArgs& a) {
  const auto cfg = resolve_config(a);
  const auto policies = resolve_policies(a, cfg);
  const auto fmt = a.format == "csv" ? meqc::Format::kCsv : meqc::Format::kJsonl;
  const std::string ext = a.format == "csv" ? ".csv" : ".jsonl";
  const auto out = prepare_out(a.out_dir);

  std::vector<meqc::RunSummary> summaries;
  for (auto kind : policies) {
    for (auto seed : cfg.seeds) {
      meqc::RunOptions opts;
      opts.timing = a.timing;
      auto result = meqc::run(cfg, kind, seed, opts);
      const auto name = "records_" + std::string(meqc::policy_name(kind)) + "_" + std::to_string(seed) + ext;
      meqc::emit((out / name).string(), result.records, fmt);
      std::cout << meqc::policy_name(kind) << " seed=" << seed
                << " time_avg_wset=" << meqc::format_number(result.summary.time_avg_wset)
                << " infeasible_fraction=" << meqc::format_number(result.summary.infeasible_fraction) << "\n";
      summaries.push_back(std::move(result.summary));
    }
  }
  meqc::emit((out / ("summary" + ext)).string(), summaries, fmt);
  return kExitOk;
}

int cmd_sweep(const CommonArgs& a, std::string param, std::vector<double> values) {
  auto cfg = resolve_config(a);
  if (param.empty() && cfg.sweep) param = cfg.sweep->path;
  if (values.empty() && cfg.sweep) values = cfg.sweep->values;
  if (param.empty()) throw meqc::ConfigError(meqc::ConfigError::Kind::kInvalidValue, "sweep.path", "missing");
  if (values.empty()) throw meqc::ConfigError(meqc::ConfigError::Kind::kInvalidValue, "sweep.values", "missing");
  const auto policies = resolve_policies(a, cfg);
  const auto fmt = a.format == "csv" ? meqc::Format::kCsv : meqc::Format::kJsonl;
  const auto out = prepare_out(a.out_dir);

  const auto rows = meqc::sweep(cfg, param, values, policies, cfg.seeds, 0, a.timing);
  meqc::emit((out / (a.format == "csv" ? "sweep.csv" : "sweep.jsonl")).string(), rows, fmt);
  for (const auto& row : rows) {
    std::cout << row.parameter << "=" << meqc::format_number(row.value) << " " << row.summary.policy
              << " seed=" << row.summary.seed << " time_avg_wset=" << meqc::format_number(row.summary.time_avg_wset)
              << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid edge / quantum offloading simulator"};
  app.require_subcommand(1);

  CommonArgs run_args;
  auto* run = app.add_subcommand("run", "Run policies over seeds and write per-slot records");
  add_common(run, run_args);

  CommonArgs sweep_args;
  std::string param;
  std::vector<double> values;
  auto* sw = app.add_subcommand("sweep", "Sweep one numeric parameter and write summaries");
  add_common(sw, sweep_args);
  sw->add_option("--param", param, "Dotted parameter path");
  sw->add_option("--values", values, "Parameter values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    return cmd_sweep(sweep_args, param, values);
  } catch (const meqc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const meqc::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}
