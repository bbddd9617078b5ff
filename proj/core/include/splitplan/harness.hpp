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

#ifndef SPLITPLAN_HARNESS_HPP_
#define SPLITPLAN_HARNESS_HPP_

// Monte-Carlo experiments: seeded trials, parameter sweeps, data tables and
// wall-time scaling.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitplan/arch.hpp"
#include "splitplan/channel.hpp"
#include "splitplan/delay.hpp"
#include "splitplan/serial.hpp"

namespace splitplan {

enum class Policy {
  kP1,
  kP2,
  kMinData,
  kFirstLayer,
  kP3,
  kQueueHeuristic,
  kQueueFirstLayer,
};

std::string_view policy_name(Policy p);
/// Accepts the CLI names: p1, p2, min-data, first-layer, p3,
/// queue-heuristic, queue-first-layer.
Policy parse_policy(std::string_view name);
std::vector<Policy> all_policies();

enum class SweepParam {
  kNone,
  kDevices,
  kPower,
  kBandwidth,
  kDeviceFlops,
  kServerFlops,
  kIterations,
};

std::string_view sweep_param_name(SweepParam p);
/// devices, power, bandwidth, fdev, fserver, iters.
SweepParam parse_sweep_param(std::string_view name);

struct ChannelConfig {
  double power_w = 1.0;
  double gain_tx_dbi = 1.0;
  double gain_rx_dbi = 10.0;
  double wavelength_m = 0.05;
  double distance_m = 50.0;
  double pathloss_exp = 2.4;
  double noise_dbm_per_hz = -174.0;
  /// Linear gains; when set they take precedence over the dBi values.
  std::optional<double> gain_tx_linear;
  std::optional<double> gain_rx_linear;

  LinkParams link(double fading_power) const;
};

struct ExperimentConfig {
  std::filesystem::path architecture_path;
  CutProfile profile;  // filled from architecture_path by the loader
  ChannelConfig channel;
  int devices = 10;
  double device_flops = 30e9;
  double server_flops = 300e9;
  double bandwidth_hz = 200e6;
  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<Policy> policies = all_policies();
  SweepParam sweep = SweepParam::kNone;
  std::vector<double> sweep_values;
  SerialSettings settings;
  int threads = 1;

  /// Throws ValidationError.
  void validate() const;
};

/// Parses a JSON experiment description. A relative architecture path is
/// resolved against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Devices for one trial; fading drawn from (seed, trial, device).
NetworkInstance build_network(const ExperimentConfig& config,
                              std::uint64_t trial);

/// Copy of `config` with the sweep parameter set to `value`.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config,
                                   SweepParam param, double value);

AllocationPlan run_policy(Policy policy, const NetworkInstance& net,
                          const SerialSettings& settings);

struct PolicyRecord {
  Policy policy = Policy::kP1;
  double objective_s = 0.0;
  int iterations = 0;
  double wall_s = 0.0;
  std::optional<std::string> error;  // "Code: message"
};

struct TrialRecord {
  std::uint64_t trial = 0;
  std::vector<PolicyRecord> records;
};

/// Solver errors are captured per policy; the other policies still run.
TrialRecord run_trial(const ExperimentConfig& config, std::uint64_t trial);

/// All trials of one configuration, in trial order. Uses config.threads.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config);

struct SweepCell {
  double sweep_value = 0.0;
  Policy policy = Policy::kP1;
  double mean_delay_s = 0.0;
  double std_s = 0.0;  // sample standard deviation
  int n_trials = 0;    // successful trials
  int failures = 0;
  double mean_iterations = 0.0;
  double mean_wall_s = 0.0;
};

struct SweepResult {
  SweepParam param = SweepParam::kNone;
  std::vector<SweepCell> cells;  // sweep value major, policy minor

  const SweepCell* find(double value, Policy policy) const;
};

/// Without a sweep parameter the result has one cell per policy at value 0.
SweepResult run_sweep(const ExperimentConfig& config);

/// Writes `<param>_<policy>.dat` (x and mean delay) per policy and
/// `<param>.csv`. Throws IoError naming the path on failure.
void write_tables(const SweepResult& result,
                  const std::filesystem::path& out_dir);

/// Shortest round-trip decimal form.
std::string format_number(double value);

struct ScalingRow {
  Policy policy = Policy::kP1;
  int devices = 0;
  double median_wall_s = 0.0;
};

struct ScalingReport {
  std::vector<int> devices;
  std::vector<ScalingRow> rows;

  double median(Policy policy, int devices) const;
  /// median(last K) / median(first K).
  double growth(Policy policy) const;
};

/// Median over `repeats` trials of the best of three wall times, per policy
/// and K.
ScalingReport bench_scaling(const ExperimentConfig& config,
                            const std::vector<int>& devices,
                            const std::vector<Policy>& policies, int repeats);

}  // namespace splitplan

#endif  // SPLITPLAN_HARNESS_HPP_
