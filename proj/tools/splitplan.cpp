// Copyright 2026 The splitplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// splitplan command-line driver.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "splitplan/arch.hpp"
#include "splitplan/error.hpp"
#include "splitplan/harness.hpp"
#include "splitplan/oracle.hpp"
#include "splitplan/parallel.hpp"
#include "splitplan/serial.hpp"

namespace {

using nlohmann::json;
using namespace splitplan;

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  int threads = 0;
  std::string policies;
  bool strict_breaks = false;
  std::string layer_rule;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)")->required();
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&o](std::uint64_t s) { o.seed = s; o.seed_set = true; },
      "Override the seed");
  cmd->add_option("--trials", o.trials, "Override the trial count");
  cmd->add_option("--threads", o.threads, "Worker threads for trials");
  cmd->add_option("--policy", o.policies, "Comma-separated policy list");
  cmd->add_flag("--strict-breaks", o.strict_breaks,
                "Eliminate breaks until one remains");
  cmd->add_option("--p3-layer-rule", o.layer_rule, "full or c-only")
      ->check(CLI::IsMember({"full", "c-only"}));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad number '" + item + "'");
    }
  }
  return out;
}

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig c = load_experiment_config(o.config);
  if (o.seed_set) c.seed = o.seed;
  if (o.trials > 0) c.trials = o.trials;
  if (o.threads > 0) c.threads = o.threads;
  if (!o.policies.empty()) {
    c.policies.clear();
    for (const std::string& p : split_list(o.policies)) {
      c.policies.push_back(parse_policy(p));
    }
  }
  if (o.strict_breaks) c.settings.strict_breaks = true;
  if (o.layer_rule == "c-only") c.settings.layer_rule = LayerRule::kArrivalOnly;
  if (o.layer_rule == "full") c.settings.layer_rule = LayerRule::kFull;
  c.validate();
  return c;
}

json cells_json(const SweepResult& r) {
  json out = json::array();
  for (const SweepCell& c : r.cells) {
    out.push_back({{"sweep_value", c.sweep_value},
                   {"policy", std::string(policy_name(c.policy))},
                   {"mean_delay_s", c.mean_delay_s},
                   {"std_s", c.std_s},
                   {"n_trials", c.n_trials},
                   {"failures", c.failures},
                   {"mean_iterations", c.mean_iterations},
                   {"mean_wall_s", c.mean_wall_s}});
  }
  return out;
}

json plan_json(const AllocationPlan& plan) {
  json devices = json::array();
  for (const DeviceAllocation& a : plan.devices) {
    devices.push_back({{"cut", a.cut},
                       {"bandwidth_hz", a.bandwidth_hz},
                       {"server_flops", a.server_flops},
                       {"arrival_s", a.arrival_s},
                       {"residual_flops", a.residual_flops},
                       {"total_s", a.total_s}});
  }
  return {{"policy", plan.policy},
          {"objective_s", plan.objective_s},
          {"iterations", plan.iterations},
          {"devices", devices}};
}

int run_simulate(const CommonOptions& o, bool per_trial, const std::string& out) {
  ExperimentConfig c = load(o);
  c.sweep = SweepParam::kNone;
  const SweepResult r = run_sweep(c);
  json doc = {{"seed", c.seed}, {"trials", c.trials}, {"summary", cells_json(r)}};
  if (per_trial) {
    json trials = json::array();
    for (const TrialRecord& t : run_trials(c)) {
      json recs = json::array();
      for (const PolicyRecord& p : t.records) {
        json rec = {{"policy", std::string(policy_name(p.policy))},
                    {"objective_s", p.objective_s},
                    {"iterations", p.iterations}};
        if (p.error) rec["error"] = *p.error;
        recs.push_back(rec);
      }
      trials.push_back({{"trial", t.trial}, {"records", recs}});
    }
    doc["per_trial"] = trials;
  }
  if (!out.empty()) write_tables(r, out);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int run_sweep_cmd(const CommonOptions& o, const std::string& param,
                  const std::string& values, const std::string& out) {
  ExperimentConfig c = load(o);
  if (!param.empty()) c.sweep = parse_sweep_param(param);
  if (!values.empty()) c.sweep_values = parse_values(values);
  c.validate();
  const SweepResult r = run_sweep(c);
  if (!out.empty()) write_tables(r, out);
  std::cout << json{{"param", std::string(sweep_param_name(r.param))},
                    {"cells", cells_json(r)}}
                   .dump(2)
            << "\n";
  return 0;
}

int run_profile(const std::string& arch_path, bool as_json) {
  const Architecture arch = load_architecture_file(arch_path);
  const CutProfile p = propagate(arch);
  if (as_json) {
    json rows = json::array();
    for (int l = 0; l < p.num_cuts(); ++l) {
      rows.push_back({{"cut", l},
                      {"cum_workload", p.cum_workload[l]},
                      {"transmit_bits", p.transmit_bits[l]},
                      {"index_bits", p.index_bits[l]},
                      {"residual_workload", p.residual_workload(l)},
                      {"shape",
                       {p.shapes[l].channels, p.shapes[l].height,
                        p.shapes[l].width}}});
    }
    std::cout << json{{"modules", p.num_modules()},
                      {"total_workload", p.total_workload},
                      {"cuts", rows}}
                     .dump(2)
              << "\n";
    return 0;
  }
  std::printf("%4s %16s %14s %12s %16s  %s\n", "cut", "cum_workload",
              "transmit_bits", "index_bits", "residual", "shape");
  for (int l = 0; l < p.num_cuts(); ++l) {
    std::printf("%4d %16lld %14lld %12lld %16lld  %lldx%lldx%lld\n", l,
                static_cast<long long>(p.cum_workload[l]),
                static_cast<long long>(p.transmit_bits[l]),
                static_cast<long long>(p.index_bits[l]),
                static_cast<long long>(p.residual_workload(l)),
                static_cast<long long>(p.shapes[l].channels),
                static_cast<long long>(p.shapes[l].height),
                static_cast<long long>(p.shapes[l].width));
  }
  std::printf("total_workload %lld\n", static_cast<long long>(p.total_workload));
  return 0;
}

int run_oracle(const CommonOptions& o, std::uint64_t trial, int points) {
  const ExperimentConfig c = load(o);
  const NetworkInstance net = build_network(c, trial);
  GridSpec grid;
  grid.simplex_points = points;
  const OracleResult par = oracle_parallel(net, grid);
  const OracleResult ser = oracle_serial(net, grid);
  auto oracle_json = [](const OracleResult& r) {
    return json{{"objective_s", r.objective},
                {"cuts", r.cuts},
                {"bandwidths_hz", r.bandwidths},
                {"grid_points", r.evaluated}};
  };
  json solvers = json::array();
  for (Policy p : c.policies) {
    solvers.push_back(plan_json(run_policy(p, net, c.settings)));
  }
  std::cout << json{{"trial", trial},
                    {"parallel", oracle_json(par)},
                    {"serial", oracle_json(ser)},
                    {"solvers", solvers}}
                   .dump(2)
            << "\n";
  return 0;
}

int run_bench(const CommonOptions& o, const std::string& devices, int repeats) {
  const ExperimentConfig c = load(o);
  std::vector<int> ks;
  for (double v : parse_values(devices)) ks.push_back(static_cast<int>(v));
  const ScalingReport r = bench_scaling(c, ks, c.policies, repeats);
  json rows = json::array();
  for (const ScalingRow& row : r.rows) {
    rows.push_back({{"policy", std::string(policy_name(row.policy))},
                    {"devices", row.devices},
                    {"median_wall_s", row.median_wall_s}});
  }
  json growth = json::object();
  if (ks.size() >= 2) {
    for (Policy p : c.policies) {
      growth[std::string(policy_name(p))] = r.growth(p);
    }
  }
  std::cout << json{{"rows", rows}, {"growth", growth}}.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Split-inference cut and resource planner"};
  app.require_subcommand(1);

  CommonOptions sim_opts, sweep_opts, oracle_opts, bench_opts;
  bool per_trial = false;
  std::string sim_out, sweep_out, sweep_param, sweep_values, arch_path;
  std::string bench_devices = "4,8,16";
  bool profile_json = false;
  std::uint64_t oracle_trial = 0;
  int oracle_points = 101;
  int bench_repeats = 5;

  CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo run of policies");
  add_common(sim, sim_opts);
  sim->add_flag("--per-trial", per_trial, "Include every trial record");
  sim->add_option("--out", sim_out, "Directory for data tables");

  CLI::App* sweep = app.add_subcommand("sweep", "Parameter sweep");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param,
                    "devices|power|bandwidth|fdev|fserver|iters");
  sweep->add_option("--values", sweep_values, "Comma-separated values");
  sweep->add_option("--out", sweep_out, "Directory for data tables");

  CLI::App* profile = app.add_subcommand("profile", "Dump the cut profile");
  profile->add_option("--arch", arch_path, "Architecture config")->required();
  profile->add_flag("--json", profile_json, "JSON output");

  CLI::App* oracle = app.add_subcommand("oracle", "Grid oracles for one trial");
  add_common(oracle, oracle_opts);
  oracle->add_option("--trial", oracle_trial, "Trial index");
  oracle->add_option("--simplex-points", oracle_points,
                     "Bandwidth grid points per dimension");

  CLI::App* bench = app.add_subcommand("bench", "Solver wall time versus K");
  add_common(bench, bench_opts);
  bench->add_option("--devices", bench_devices, "Ascending device counts");
  bench->add_option("--repeats", bench_repeats, "Trials per device count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return run_simulate(sim_opts, per_trial, sim_out);
    if (*sweep) {
      return run_sweep_cmd(sweep_opts, sweep_param, sweep_values, sweep_out);
    }
    if (*profile) return run_profile(arch_path, profile_json);
    if (*oracle) return run_oracle(oracle_opts, oracle_trial, oracle_points);
    if (*bench) return run_bench(bench_opts, bench_devices, bench_repeats);
  } catch (const Error& e) {
    std::cerr << json{{"error", std::string(error_name(e.code()))},
                      {"message", e.what()}}
                     .dump()
              << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}}.dump()
              << "\n";
    return 3;
  }
  return 1;
}
