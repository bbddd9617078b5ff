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

#ifndef SPLITPLAN_TESTS_SUPPORT_HPP_
#define SPLITPLAN_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "splitplan/arch.hpp"
#include "splitplan/channel.hpp"
#include "splitplan/delay.hpp"
#include "splitplan/error.hpp"

#define EXPECT_SPLITPLAN_ERROR(stmt, expected)                        \
  do {                                                                \
    try {                                                             \
      stmt;                                                           \
      ADD_FAILURE() << "no exception from " #stmt;                   \
    } catch (const ::splitplan::Error& e) {                           \
      EXPECT_EQ(::splitplan::error_name(e.code()),                    \
                ::splitplan::error_name(expected))                    \
          << e.what();                                                \
    }                                                                 \
  } while (0)

namespace splitplan::testing {

inline std::string config_path(const std::string& name) {
  return std::string(SPLITPLAN_CONFIG_DIR) + "/" + name;
}

inline const CutProfile& toy_profile() {
  static const CutProfile p =
      propagate(load_architecture_file(config_path("toy4.json")));
  return p;
}

inline const CutProfile& reference_profile() {
  static const CutProfile p =
      propagate(load_architecture_file(config_path("enet_reference.json")));
  return p;
}

/// Profile with explicit per-cut local work and payload.
inline CutProfile make_profile(std::vector<FlopCount> cum,
                               std::vector<BitCount> bits, FlopCount total) {
  CutProfile p;
  p.cum_workload = std::move(cum);
  p.transmit_bits = std::move(bits);
  p.index_bits.assign(p.cum_workload.size(), 0);
  p.shapes.assign(p.cum_workload.size(), TensorShape{});
  p.total_workload = total;
  return p;
}

inline LinkParams unit_link(double fading = 1.0) {
  LinkParams l;
  l.gain_tx = db_to_linear(1.0);
  l.gain_rx = db_to_linear(10.0);
  l.fading_power = fading;
  return l;
}

/// Device whose link delivers exactly `rate` bit/s at `bandwidth_hz`.
inline Device device_with_rate(double rate, CutProfile profile, double flops,
                               double bandwidth_hz = 20e6) {
  Device d;
  d.link = unit_link();
  const double snr = std::expm1(rate / bandwidth_hz * std::numbers::ln2);
  d.link.fading_power = snr * bandwidth_hz / d.link.gain_hz();
  d.compute_flops = flops;
  d.profile = std::move(profile);
  return d;
}

/// K devices on `profile` with Exponential(1) fading from `rng`.
inline NetworkInstance random_network(const CutProfile& profile, int devices,
                                      std::mt19937_64& rng,
                                      double device_flops = 30e9,
                                      double server_flops = 300e9,
                                      double bandwidth_hz = 200e6) {
  std::exponential_distribution<double> fading(1.0);
  NetworkInstance net;
  net.server_flops = server_flops;
  net.bandwidth_hz = bandwidth_hz;
  for (int k = 0; k < devices; ++k) {
    Device d;
    d.link = unit_link(std::max(fading(rng), 0.05));
    d.compute_flops = device_flops;
    d.profile = profile;
    net.devices.push_back(std::move(d));
  }
  return net;
}

}  // namespace splitplan::testing

#endif  // SPLITPLAN_TESTS_SUPPORT_HPP_
