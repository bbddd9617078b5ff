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

#include "splitplan/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "splitplan/error.hpp"
#include "splitplan/parallel.hpp"
#include "splitplan/rng.hpp"

namespace splitplan {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<Policy, std::string_view>, 7> kPolicyNames{{
    {Policy::kP1, "p1"},
    {Policy::kP2, "p2"},
    {Policy::kMinData, "min-data"},
    {Policy::kFirstLayer, "first-layer"},
    {Policy::kP3, "p3"},
    {Policy::kQueueHeuristic, "queue-heuristic"},
    {Policy::kQueueFirstLayer, "queue-first-layer"},
}};

constexpr std::array<std::pair<SweepParam, std::string_view>, 7> kSweepNames{{
    {SweepParam::kNone, "none"},
    {SweepParam::kDevices, "devices"},
    {SweepParam::kPower, "power"},
    {SweepParam::kBandwidth, "bandwidth"},
    {SweepParam::kDeviceFlops, "fdev"},
    {SweepParam::kServerFlops, "fserver"},
    {SweepParam::kIterations, "iters"},
}};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kValidationError, what);
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      invalid("unknown key '" + key + "' in " + where);
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

void parse_channel(const json& j, ChannelConfig& c) {
  reject_unknown(j,
                 {"power_w", "gain_tx_dbi", "gain_rx_dbi", "gain_tx_linear",
                  "gain_rx_linear", "wavelength_m", "distance_m",
                  "pathloss_exp", "noise_dbm_per_hz"},
                 "channel");
  read(j, "power_w", c.power_w);
  read(j, "gain_tx_dbi", c.gain_tx_dbi);
  read(j, "gain_rx_dbi", c.gain_rx_dbi);
  read(j, "wavelength_m", c.wavelength_m);
  read(j, "distance_m", c.distance_m);
  read(j, "pathloss_exp", c.pathloss_exp);
  read(j, "noise_dbm_per_hz", c.noise_dbm_per_hz);
  if (j.contains("gain_tx_linear")) c.gain_tx_linear = j["gain_tx_linear"].get<double>();
  if (j.contains("gain_rx_linear")) c.gain_rx_linear = j["gain_rx_linear"].get<double>();
}

void parse_solver(const json& j, SerialSettings& s) {
  reject_unknown(j,
                 {"bisection_tol", "max_iterations", "stall_tol", "init",
                  "init_seed", "heuristic_iterations", "strict_breaks",
                  "p3_layer_rule"},
                 "solver");
  read(j, "bisection_tol", s.solver.bisection_tol);
  read(j, "max_iterations", s.solver.max_iterations);
  read(j, "stall_tol", s.solver.stall_tol);
  read(j, "init_seed", s.solver.init_seed);
  read(j, "heuristic_iterations", s.heuristic_iterations);
  read(j, "strict_breaks", s.strict_breaks);
  if (j.contains("init")) {
    const std::string init = j["init"].get<std::string>();
    if (init == "min-data") {
      s.solver.init = InitMode::kMinData;
    } else if (init == "random") {
      s.solver.init = InitMode::kRandom;
    } else {
      invalid("solver.init must be min-data or random");
    }
  }
  if (j.contains("p3_layer_rule")) {
    const std::string rule = j["p3_layer_rule"].get<std::string>();
    if (rule == "full") {
      s.layer_rule = LayerRule::kFull;
    } else if (rule == "c-only") {
      s.layer_rule = LayerRule::kArrivalOnly;
    } else {
      invalid("solver.p3_layer_rule must be full or c-only");
    }
  }
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  out << text;
  out.close();
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

std::string_view policy_name(Policy p) {
  for (const auto& [policy, name] : kPolicyNames) {
    if (policy == p) return name;
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  for (const auto& [policy, known] : kPolicyNames) {
    if (known == name) return policy;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown policy '" + std::string(name) + "'");
}

std::vector<Policy> all_policies() {
  std::vector<Policy> out;
  for (const auto& entry : kPolicyNames) out.push_back(entry.first);
  return out;
}

std::string_view sweep_param_name(SweepParam p) {
  for (const auto& [param, name] : kSweepNames) {
    if (param == p) return name;
  }
  return "unknown";
}

SweepParam parse_sweep_param(std::string_view name) {
  for (const auto& [param, known] : kSweepNames) {
    if (known == name) return param;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown sweep parameter '" + std::string(name) + "'");
}

LinkParams ChannelConfig::link(double fading_power) const {
  LinkParams l;
  l.power_w = power_w;
  l.gain_tx = gain_tx_linear.value_or(db_to_linear(gain_tx_dbi));
  l.gain_rx = gain_rx_linear.value_or(db_to_linear(gain_rx_dbi));
  l.wavelength_m = wavelength_m;
  l.distance_m = distance_m;
  l.pathloss_exp = pathloss_exp;
  l.noise_w_per_hz = dbm_per_hz_to_watts(noise_dbm_per_hz);
  l.fading_power = fading_power;
  return l;
}

void ExperimentConfig::validate() const {
  if (devices < 1) invalid("devices must be >= 1");
  if (trials < 1) invalid("trials must be >= 1");
  if (threads < 1) invalid("threads must be >= 1");
  if (!(device_flops > 0.0) || !(server_flops > 0.0) ||
      !(bandwidth_hz > 0.0)) {
    invalid("compute and bandwidth must be positive");
  }
  if (!(channel.power_w > 0.0) || !(channel.wavelength_m > 0.0) ||
      !(channel.distance_m > 0.0) || !(channel.pathloss_exp > 0.0)) {
    invalid("channel values must be positive");
  }
  if (policies.empty()) invalid("policy list is empty");
  if (profile.num_cuts() < 1) invalid("architecture profile is missing");
  if (sweep != SweepParam::kNone) {
    if (sweep_values.empty()) invalid("sweep values are empty");
    for (double v : sweep_values) {
      if (!(v > 0.0)) invalid("sweep values must be positive");
    }
  }
  try {
    settings.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }
}

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  ExperimentConfig c;
  try {
    if (!j.is_object()) invalid("experiment config must be an object");
    reject_unknown(j,
                   {"architecture", "channel", "devices", "device_flops",
                    "server_flops", "bandwidth_hz", "trials", "seed",
                    "policies", "sweep", "solver", "threads"},
                   "experiment");
    if (!j.contains("architecture")) invalid("architecture path is required");
    c.architecture_path = j["architecture"].get<std::string>();
    if (c.architecture_path.is_relative()) {
      c.architecture_path = base_dir / c.architecture_path;
    }
    if (j.contains("channel")) parse_channel(j["channel"], c.channel);
    read(j, "devices", c.devices);
    read(j, "device_flops", c.device_flops);
    read(j, "server_flops", c.server_flops);
    read(j, "bandwidth_hz", c.bandwidth_hz);
    read(j, "trials", c.trials);
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    if (j.contains("policies")) {
      c.policies.clear();
      for (const auto& p : j["policies"]) {
        c.policies.push_back(parse_policy(p.get<std::string>()));
      }
    }
    if (j.contains("sweep")) {
      const json& s = j["sweep"];
      reject_unknown(s, {"param", "values"}, "sweep");
      c.sweep = parse_sweep_param(s.at("param").get<std::string>());
      c.sweep_values = s.at("values").get<std::vector<double>>();
    }
    if (j.contains("solver")) parse_solver(j["solver"], c.settings);
  } catch (const json::exception& e) {
    invalid(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kValidationError) throw;
    invalid(e.what());
  }
  c.profile = propagate(load_architecture_file(c.architecture_path.string()));
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str(), path.parent_path());
}

NetworkInstance build_network(const ExperimentConfig& config,
                              std::uint64_t trial) {
  NetworkInstance net;
  net.server_flops = config.server_flops;
  net.bandwidth_hz = config.bandwidth_hz;
  for (int k = 0; k < config.devices; ++k) {
    Device d;
    d.link = config.channel.link(
        sample_fading(config.seed, trial, static_cast<std::uint64_t>(k)));
    d.compute_flops = config.device_flops;
    d.profile = config.profile;
    net.devices.push_back(std::move(d));
  }
  return net;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& config,
                                   SweepParam param, double value) {
  ExperimentConfig c = config;
  switch (param) {
    case SweepParam::kNone:
      break;
    case SweepParam::kDevices:
      c.devices = static_cast<int>(std::lround(value));
      break;
    case SweepParam::kPower:
      c.channel.power_w = value;
      break;
    case SweepParam::kBandwidth:
      c.bandwidth_hz = value;
      break;
    case SweepParam::kDeviceFlops:
      c.device_flops = value;
      break;
    case SweepParam::kServerFlops:
      c.server_flops = value;
      break;
    case SweepParam::kIterations:
      c.settings.solver.max_iterations = static_cast<int>(std::lround(value));
      c.settings.heuristic_iterations = c.settings.solver.max_iterations;
      break;
  }
  return c;
}

AllocationPlan run_policy(Policy policy, const NetworkInstance& net,
                          const SerialSettings& settings) {
  switch (policy) {
    case Policy::kP1:
      return solve_p1(net, settings.solver);
    case Policy::kP2:
      return solve_p2(net, settings.solver);
    case Policy::kMinData:
      return min_data_layer_policy(net, settings.solver);
    case Policy::kFirstLayer:
      return first_layer_policy(net, settings.solver);
    case Policy::kP3:
      return solve_p3(net, settings);
    case Policy::kQueueHeuristic:
      return queue_heuristic(net, settings);
    case Policy::kQueueFirstLayer:
      return queue_first_layer_policy(net, settings);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown policy");
}

TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t trial) {
  TrialRecord out;
  out.trial = trial;
  const NetworkInstance net = build_network(config, trial);
  for (Policy p : config.policies) {
    PolicyRecord r;
    r.policy = p;
    const auto start = std::chrono::steady_clock::now();
    try {
      const AllocationPlan plan = run_policy(p, net, config.settings);
      r.objective_s = plan.objective_s;
      r.iterations = plan.iterations;
    } catch (const Error& e) {
      r.error = std::string(error_name(e.code())) + ": " + e.what();
    }
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
                   .count();
    out.records.push_back(std::move(r));
  }
  return out;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config) {
  std::vector<TrialRecord> out(static_cast<std::size_t>(config.trials));
  parallel_for(out.size(), config.threads, [&](std::size_t i) {
    out[i] = run_trial(config, i);
  });
  return out;
}

const SweepCell* SweepResult::find(double value, Policy policy) const {
  for (const SweepCell& c : cells) {
    if (c.sweep_value == value && c.policy == policy) return &c;
  }
  return nullptr;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepResult result;
  result.param = config.sweep;
  const std::vector<double> values =
      config.sweep == SweepParam::kNone ? std::vector<double>{0.0}
                                        : config.sweep_values;
  for (double value : values) {
    const ExperimentConfig c = apply_sweep_value(config, config.sweep, value);
    c.validate();
    const std::vector<TrialRecord> trials = run_trials(c);
    for (std::size_t p = 0; p < c.policies.size(); ++p) {
      SweepCell cell;
      cell.sweep_value = value;
      cell.policy = c.policies[p];
      std::vector<double> delays;
      double iterations = 0.0, wall = 0.0;
      for (const TrialRecord& t : trials) {
        const PolicyRecord& r = t.records[p];
        wall += r.wall_s;
        if (r.error) {
          ++cell.failures;
          continue;
        }
        delays.push_back(r.objective_s);
        iterations += r.iterations;
      }
      cell.n_trials = static_cast<int>(delays.size());
      cell.mean_delay_s = mean_of(delays);
      cell.std_s = sample_std(delays, cell.mean_delay_s);
      if (!delays.empty()) {
        cell.mean_iterations = iterations / static_cast<double>(delays.size());
      }
      cell.mean_wall_s = wall / static_cast<double>(trials.size());
      result.cells.push_back(cell);
    }
  }
  return result;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_tables(const SweepResult& result,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }
  const std::string param(sweep_param_name(result.param));
  std::string csv = "sweep_value,policy,mean_delay_s,std_s,n_trials\n";
  std::map<std::string, std::string> dat;  // sorted by policy name
  for (const SweepCell& c : result.cells) {
    const std::string name(policy_name(c.policy));
    csv += format_number(c.sweep_value) + "," + name + "," +
           format_number(c.mean_delay_s) + "," + format_number(c.std_s) + "," +
           std::to_string(c.n_trials) + "\n";
    dat[name] += format_number(c.sweep_value) + " " +
                 format_number(c.mean_delay_s) + "\n";
  }
  write_file(out_dir / (param + ".csv"), csv);
  for (const auto& [name, text] : dat) {
    write_file(out_dir / (param + "_" + name + ".dat"), text);
  }
}

double ScalingReport::median(Policy policy, int k) const {
  for (const ScalingRow& r : rows) {
    if (r.policy == policy && r.devices == k) return r.median_wall_s;
  }
  throw Error(ErrorCode::kInvalidArgument, "no timing for that policy and K");
}

double ScalingReport::growth(Policy policy) const {
  if (devices.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "growth needs two device counts");
  }
  return median(policy, devices.back()) / median(policy, devices.front());
}

constexpr int kTimingReps = 3;

ScalingReport bench_scaling(const ExperimentConfig& config,
                            const std::vector<int>& devices,
                            const std::vector<Policy>& policies, int repeats) {
  if (!std::is_sorted(devices.begin(), devices.end()) || devices.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "device counts must be non-empty and ascending");
  }
  if (repeats < 1) {
    throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  }
  ScalingReport report;
  report.devices = devices;
  for (int k : devices) {
    ExperimentConfig c = apply_sweep_value(config, SweepParam::kDevices, k);
    std::vector<NetworkInstance> nets;
    for (int r = 0; r < repeats; ++r) {
      nets.push_back(build_network(c, static_cast<std::uint64_t>(r)));
    }
    for (Policy p : policies) {
      std::vector<double> times;
      for (const NetworkInstance& net : nets) {
        double fastest = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < kTimingReps; ++rep) {
          const auto start = std::chrono::steady_clock::now();
          try {
            (void)run_policy(p, net, c.settings);
          } catch (const Error&) {
          }
          fastest = std::min(fastest, std::chrono::duration<double>(
                                          std::chrono::steady_clock::now() - start)
                                          .count());
        }
        times.push_back(fastest);
      }
      std::sort(times.begin(), times.end());
      const std::size_t n = times.size();
      const double med = n % 2 == 1 ? times[n / 2]
                                    : 0.5 * (times[n / 2 - 1] + times[n / 2]);
      report.rows.push_back({p, k, med});
    }
  }
  return report;
}

}  // namespace splitplan
