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

#ifndef SPLITPLAN_SERIAL_HPP_
#define SPLITPLAN_SERIAL_HPP_

// Policies for a server that processes offloaded jobs one at a time, in
// arrival order.

#include <cstddef>
#include <span>
#include <vector>

#include "splitplan/delay.hpp"
#include "splitplan/parallel.hpp"

namespace splitplan {

/// Cut re-selection rule for the simultaneous-arrival policy.
enum class LayerRule {
  kFull,         // minimise max(C_kl, max_{j != k} C_j) + F_kl / f_max
  kArrivalOnly,  // minimise C_kl
};

struct SerialSettings {
  SolverSettings solver;
  LayerRule layer_rule = LayerRule::kFull;
  /// Outer iterations of the break-elimination heuristic.
  int heuristic_iterations = 4;
  /// Eliminate breaks while more than one remains instead of more than two.
  bool strict_breaks = false;

  void validate() const;
};

/// Bandwidth that makes every arrival equal (as far as the budget allows)
/// for fixed cuts: bisection on the common arrival T, then the leftover
/// spectrum is shared in proportion to each device's requirement.
std::vector<double> simultaneous_arrival_bandwidth(
    const NetworkInstance& net, std::span<const int> cuts,
    const SolverSettings& settings);

/// One Gauss-Seidel sweep over devices with bandwidth held.
std::vector<int> reselect_serial_cuts(const NetworkInstance& net,
                                      std::span<const int> cuts,
                                      std::span<const double> bandwidths,
                                      LayerRule rule);

/// Donor and receiver are queue positions at the time of the call.
struct BreakReallocation {
  std::size_t donor = 0;
  std::size_t receiver = 0;
  std::size_t donor_device = 0;
  std::size_t receiver_device = 0;
  double donor_bandwidth = 0.0;  // new B of the donor
  double transferred = 0.0;      // bandwidth moved to the receiver
};

/// Closes the break at `breaks[break_index]` by slowing the job in front of it
/// so that it completes exactly when the break's job arrives, and gives the
/// freed bandwidth to the job at the last break. Updates `bandwidths` and
/// rebuilds `queue`.
///
/// Requires at least two breaks and break_index < breaks.size() - 1. Throws
/// StalledBreak when the donor cannot meet its target and NoExcess when no
/// bandwidth is freed; on throw nothing is modified.
BreakReallocation reallocate_once(const NetworkInstance& net,
                                  std::span<const int> cuts,
                                  std::vector<double>& bandwidths,
                                  QueueState& queue,
                                  std::size_t break_index = 0);

AllocationPlan solve_p3(const NetworkInstance& net,
                        const SerialSettings& settings);
AllocationPlan queue_heuristic(const NetworkInstance& net,
                               const SerialSettings& settings);
AllocationPlan queue_first_layer_policy(const NetworkInstance& net,
                                        const SerialSettings& settings);

}  // namespace splitplan

#endif  // SPLITPLAN_SERIAL_HPP_
