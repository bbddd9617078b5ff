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

#ifndef SPLITPLAN_CHANNEL_HPP_
#define SPLITPLAN_CHANNEL_HPP_

#include <cstdint>

namespace splitplan {

/// Uplink of one device. Gains are linear; use db_to_linear() for dBi input.
struct LinkParams {
  double power_w = 1.0;
  double gain_tx = 1.0;
  double gain_rx = 1.0;
  double wavelength_m = 0.05;
  double distance_m = 50.0;
  double pathloss_exp = 2.4;
  double noise_w_per_hz = 3.981071705534972e-21;  // -174 dBm/Hz
  double fading_power = 1.0;                      // |h|^2

  /// Throws DomainError when an invariant is violated.
  void validate() const;

  /// P G_t G_r L_p(d) |h|^2 / N_0, in hertz. The rate is B log2(1 + c/B).
  double gain_hz() const;
};

double db_to_linear(double db);
/// Converts dBm/Hz to W/Hz.
double dbm_per_hz_to_watts(double dbm_per_hz);

/// (4 pi d / lambda)^-n.
double path_loss(double distance_m, double wavelength_m, double exponent);

/// Shannon rate in bit/s for `bandwidth_hz` of spectrum. Zero bandwidth gives
/// zero rate (the continuous limit).
double achievable_rate(double bandwidth_hz, const LinkParams& link);

/// Same formula with the link already folded into gain_hz().
double rate_from_gain(double bandwidth_hz, double gain_hz);

/// dR/dB at `bandwidth_hz`.
double rate_slope_from_gain(double bandwidth_hz, double gain_hz);

/// Rate as B grows without bound: c / ln 2.
double rate_ceiling(const LinkParams& link);

}  // namespace splitplan

#endif  // SPLITPLAN_CHANNEL_HPP_
