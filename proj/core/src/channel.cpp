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

#include "splitplan/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "splitplan/error.hpp"
#include "splitplan/rng.hpp"

namespace splitplan {

void LinkParams::validate() const {
  auto bad = [](const char* what) {
    throw Error(ErrorCode::kDomainError, std::string("link: ") + what);
  };
  if (!(power_w >= 0.0)) bad("transmit power must be >= 0");
  if (!(gain_tx > 0.0) || !(gain_rx > 0.0)) bad("antenna gains must be > 0");
  if (!(wavelength_m > 0.0)) bad("wavelength must be > 0");
  if (!(distance_m > 0.0)) bad("distance must be > 0");
  if (!(pathloss_exp > 0.0)) bad("path loss exponent must be > 0");
  if (!(noise_w_per_hz > 0.0)) bad("noise density must be > 0");
  if (!(fading_power >= 0.0)) bad("fading power must be >= 0");
}

double LinkParams::gain_hz() const {
  return power_w * gain_tx * gain_rx *
         path_loss(distance_m, wavelength_m, pathloss_exp) * fading_power /
         noise_w_per_hz;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_per_hz_to_watts(double dbm_per_hz) {
  return std::pow(10.0, (dbm_per_hz - 30.0) / 10.0);
}

double path_loss(double distance_m, double wavelength_m, double exponent) {
  if (!(distance_m > 0.0) || !(wavelength_m > 0.0)) {
    throw Error(ErrorCode::kDomainError,
                "path_loss: distance and wavelength must be > 0");
  }
  return std::pow(4.0 * std::numbers::pi * distance_m / wavelength_m,
                  -exponent);
}

double rate_from_gain(double bandwidth_hz, double gain_hz) {
  if (bandwidth_hz <= 0.0 || gain_hz <= 0.0) return 0.0;
  return bandwidth_hz * std::log1p(gain_hz / bandwidth_hz) /
         std::numbers::ln2;
}

double rate_slope_from_gain(double bandwidth_hz, double gain_hz) {
  if (gain_hz <= 0.0) return 0.0;
  if (bandwidth_hz <= 0.0) return INFINITY;
  const double x = gain_hz / bandwidth_hz;
  return (std::log1p(x) - x / (1.0 + x)) / std::numbers::ln2;
}

double achievable_rate(double bandwidth_hz, const LinkParams& link) {
  link.validate();
  if (bandwidth_hz < 0.0) {
    throw Error(ErrorCode::kDomainError, "bandwidth must be >= 0");
  }
  return rate_from_gain(bandwidth_hz, link.gain_hz());
}

double rate_ceiling(const LinkParams& link) {
  return link.gain_hz() / std::numbers::ln2;
}

double CounterRng::uniform(std::uint64_t trial, std::uint64_t device,
                           std::uint64_t draw) const {
  return static_cast<double>(bits(trial, device, draw) >> 11) * 0x1.0p-53;
}

double CounterRng::exponential(std::uint64_t trial, std::uint64_t device,
                               std::uint64_t draw) const {
  return -std::log1p(-uniform(trial, device, draw));
}

double sample_fading(std::uint64_t seed, std::uint64_t trial,
                     std::uint64_t device) {
  return CounterRng(seed).exponential(trial, device, 0);
}

}  // namespace splitplan
