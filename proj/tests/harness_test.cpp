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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "splitplan/harness.hpp"
#include "support.hpp"

namespace splitplan {
namespace {

namespace fs = std::filesystem;

std::string small_config(const std::string& extra = "") {
  return R"({"architecture": "toy4.json", "devices": 3, "trials": 4,
             "seed": 9)" +
         extra + "}";
}

ExperimentConfig parse(const std::string& text) {
  return parse_experiment_config(text, SPLITPLAN_CONFIG_DIR);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("splitplan_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Policies, NamesRoundTrip) {
  for (Policy p : all_policies()) EXPECT_EQ(parse_policy(policy_name(p)), p);
  EXPECT_EQ(all_policies().size(), 7u);
  EXPECT_SPLITPLAN_ERROR(parse_policy("p4"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(parse_sweep_param("fserver"), SweepParam::kServerFlops);
}

TEST(Config, DefaultFileLoads) {
  const ExperimentConfig c =
      load_experiment_config(testing::config_path("default_experiment.json"));
  EXPECT_EQ(c.devices, 10);
  EXPECT_EQ(c.trials, 100);
  EXPECT_EQ(c.bandwidth_hz, 200e6);
  EXPECT_EQ(c.policies.size(), 7u);
  EXPECT_EQ(c.profile.num_cuts(), 31);
  // 1 dBi transmit gain on top of the unit-gain reference link.
  EXPECT_NEAR(c.channel.link(1.0).gain_hz() / 364666884200.9454,
              std::pow(10.0, 0.1), 1e-12);
}

TEST(Config, LinearGainOverride) {
  const ExperimentConfig c =
      parse(small_config(R"(, "channel": {"gain_tx_linear": 1, "gain_rx_linear": 10})"));
  EXPECT_EQ(c.channel.link(1.0).gain_tx, 1.0);
  EXPECT_EQ(c.channel.link(1.0).gain_rx, 10.0);
}

TEST(Config, SolverBlock) {
  const ExperimentConfig c = parse(small_config(
      R"(, "solver": {"init": "random", "init_seed": 3, "strict_breaks": true,
                      "p3_layer_rule": "c-only", "max_iterations": 7})"));
  EXPECT_EQ(c.settings.solver.init, InitMode::kRandom);
  EXPECT_EQ(c.settings.solver.init_seed, 3u);
  EXPECT_TRUE(c.settings.strict_breaks);
  EXPECT_EQ(c.settings.layer_rule, LayerRule::kArrivalOnly);
  EXPECT_EQ(c.settings.solver.max_iterations, 7);
}

TEST(Config, Rejections) {
  EXPECT_SPLITPLAN_ERROR(parse("{"), ErrorCode::kParseError);
  EXPECT_SPLITPLAN_ERROR(parse(small_config(R"(, "devise": 3)")),
                         ErrorCode::kValidationError);
  EXPECT_SPLITPLAN_ERROR(parse(R"({"devices": 3})"),
                         ErrorCode::kValidationError);
  EXPECT_SPLITPLAN_ERROR(parse(small_config(R"(, "devices": 0)")),
                         ErrorCode::kValidationError);
  EXPECT_SPLITPLAN_ERROR(parse(small_config(R"(, "bandwidth_hz": -1)")),
                         ErrorCode::kValidationError);
  EXPECT_SPLITPLAN_ERROR(parse(small_config(R"(, "policies": ["nope"])")),
                         ErrorCode::kValidationError);
  EXPECT_SPLITPLAN_ERROR(
      parse(small_config(R"(, "solver": {"init": "sometimes"})")),
      ErrorCode::kValidationError);
  EXPECT_SPLITPLAN_ERROR(
      parse_experiment_config(R"({"architecture": "missing.json"})",
                              SPLITPLAN_CONFIG_DIR),
      ErrorCode::kIoError);
  EXPECT_SPLITPLAN_ERROR(load_experiment_config("/nonexistent/x.json"),
                         ErrorCode::kIoError);
}

TEST(Network, DeterministicPerTrialAndDevice) {
  ExperimentConfig c = parse(small_config());
  const NetworkInstance a = build_network(c, 2);
  const NetworkInstance b = build_network(c, 2);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a.devices[k].link.fading_power, b.devices[k].link.fading_power);
  }
  EXPECT_NE(build_network(c, 3).devices[0].link.fading_power,
            a.devices[0].link.fading_power);
  // Growing K keeps the existing devices' draws.
  c.devices = 5;
  EXPECT_EQ(build_network(c, 2).devices[1].link.fading_power,
            a.devices[1].link.fading_power);
}

TEST(Sweep, ApplyValue) {
  const ExperimentConfig c = parse(small_config());
  EXPECT_EQ(apply_sweep_value(c, SweepParam::kDevices, 6).devices, 6);
  EXPECT_EQ(apply_sweep_value(c, SweepParam::kBandwidth, 3e8).bandwidth_hz, 3e8);
  EXPECT_EQ(apply_sweep_value(c, SweepParam::kPower, 2).channel.power_w, 2.0);
  const ExperimentConfig it = apply_sweep_value(c, SweepParam::kIterations, 2);
  EXPECT_EQ(it.settings.solver.max_iterations, 2);
  EXPECT_EQ(it.settings.heuristic_iterations, 2);
}

TEST(Trials, SinglePolicyAndThreadIndependence) {
  ExperimentConfig c = parse(small_config(R"(, "policies": ["p2"])"));
  const TrialRecord t = run_trial(c, 0);
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].policy, Policy::kP2);
  EXPECT_FALSE(t.records[0].error.has_value());
  EXPECT_GT(t.records[0].objective_s, 0.0);

  c.policies = all_policies();
  const std::vector<TrialRecord> serial = run_trials(c);
  c.threads = 3;
  const std::vector<TrialRecord> pooled = run_trials(c);
  ASSERT_EQ(serial.size(), pooled.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].trial, i);
    for (std::size_t p = 0; p < serial[i].records.size(); ++p) {
      EXPECT_EQ(serial[i].records[p].objective_s,
                pooled[i].records[p].objective_s);
    }
  }
}

TEST(Tables, EmptyResultWritesHeaderOnly) {
  const fs::path dir = scratch_dir("empty");
  SweepResult r;
  r.param = SweepParam::kDevices;
  write_tables(r, dir);
  EXPECT_EQ(read_file(dir / "devices.csv"),
            "sweep_value,policy,mean_delay_s,std_s,n_trials\n");
  fs::remove_all(dir);
}

TEST(Tables, SweepRowsAndByteIdenticalRerun) {
  ExperimentConfig c = parse(small_config());
  c.trials = 2;
  c.sweep = SweepParam::kDevices;
  c.sweep_values = {2, 3, 4, 5, 6};
  const SweepResult r = run_sweep(c);
  EXPECT_EQ(r.cells.size(), 35u);
  const SweepCell* cell = r.find(4, Policy::kP3);
  ASSERT_NE(cell, nullptr);
  EXPECT_EQ(cell->n_trials, 2);
  EXPECT_EQ(cell->failures, 0);

  const fs::path a = scratch_dir("a"), b = scratch_dir("b");
  write_tables(r, a);
  write_tables(run_sweep(c), b);
  const std::string csv = read_file(a / "devices.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 36);
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_EQ(read_file(entry.path()),
              read_file(b / entry.path().filename()))
        << entry.path();
  }
  EXPECT_TRUE(fs::exists(a / "devices_queue-heuristic.dat"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Tables, NumberFormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 2.5e8, 1e-300}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
}

TEST(Scaling, ReportsMedians) {
  ExperimentConfig c = parse(small_config());
  const ScalingReport r = bench_scaling(c, {2, 4}, {Policy::kP2}, 3);
  EXPECT_GT(r.median(Policy::kP2, 4), 0.0);
  EXPECT_GT(r.growth(Policy::kP2), 0.0);
  EXPECT_SPLITPLAN_ERROR(bench_scaling(c, {4, 2}, {Policy::kP2}, 1),
                         ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace splitplan
