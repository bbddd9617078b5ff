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

#ifndef SPLITPLAN_PARALLEL_HPP_
#define SPLITPLAN_PARALLEL_HPP_

// Policies for a server that splits its compute across devices.
//
// All four policies share the same two building blocks: an equal-delay
// server-compute split for fixed arrivals (lemma1_allocate) and a joint
// bandwidth/compute min-max solver for fixed cuts (solve_parallel_resources).
// P1 and P2 alternate a resource step with per-device cut re-selection.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "splitplan/bisect.hpp"
#include "splitplan/channel.hpp"
#include "splitplan/delay.hpp"

namespace splitplan {

enum class InitMode { kMinData, kRandom };

struct SolverSettings {
  double bisection_tol = 1e-9;  // relative
  int max_iterations = 20;      // outer alternating iterations
  double stall_tol = 1e-6;      // relative objective change
  InitMode init = InitMode::kMinData;
  std::uint64_t init_seed = 0;

  void validate() const;
};

/// Devices with arrival C_k and server work F_k competing for f_max.
struct EqualDelayProblem {
  std::vector<double> arrivals;
  std::vector<double> residuals;
  double server_flops = 0.0;
};

/// Anchor and root interval (0, bound) for a chosen anchor device.
struct EqualDelayBounds {
  std::vector<std::size_t> active;  // devices with F_k != 0
  std::size_t anchor = 0;
  double bound = std::numeric_limits<double>::infinity();  // f_b
};

/// Anchor = argmin of C over the active set (first index on ties).
EqualDelayBounds equal_delay_bounds(const EqualDelayProblem& p);
/// Same bound formula for an arbitrary anchor; a wrong anchor may give a
/// negative bound, i.e. an empty root interval.
EqualDelayBounds equal_delay_bounds(const EqualDelayProblem& p,
                                    std::size_t anchor);

/// q(x) = x + sum_{k active, k != m} x F_k / (F_m + x (C_m - C_k)).
double equal_delay_q(const EqualDelayProblem& p, const EqualDelayBounds& b,
                     double x);

struct EqualDelayAllocation {
  /// True when no device has server work; all shares are then zero.
  bool empty_active = false;
  std::vector<double> server_flops;
  double anchor_flops = 0.0;   // root x0
  double common_delay = 0.0;   // C_k + F_k / f_k over the active set
  double objective = 0.0;      // max over all devices, including inactive
  int iterations = 0;
};

/// Equal-delay split of f_max: bisects q(x) = f_max on (0, min(f_b, f_max)].
/// The shares are renormalised so they sum to f_max to rounding.
EqualDelayAllocation lemma1_allocate(const EqualDelayProblem& p);

/// Smallest bandwidth whose rate reaches `rate_bps`. Throws Unreachable when
/// the rate is at or above the c / ln 2 ceiling.
double bandwidth_for_rate(const LinkParams& link, double rate_bps);

/// Bracket [lo, hi] with rate(lo) < rate_bps <= rate(hi), tight to a few ulps.
Bracket bandwidth_bracket(double gain_hz, double rate_bps);

/// First cut minimising D_l + tau_l.
int min_data_cut(const CutProfile& profile);

/// Initial cuts for alternating solvers.
std::vector<int> initial_cuts(const NetworkInstance& net,
                              const SolverSettings& settings);

/// Starting points for the alternating solvers: the configured initial cuts
/// and, when different, cut 0 on every device. Each start is run and the best
/// plan kept, so a solver never loses to its no-split counterpart.
std::vector<std::vector<int>> starting_cuts(const NetworkInstance& net,
                                            const SolverSettings& settings);

/// Equal bandwidth, equal-delay compute split: the P2 resource step.
AllocationPlan fixed_bandwidth_resources(const NetworkInstance& net,
                                         std::span<const int> cuts);

/// Joint bandwidth + compute min-max for fixed cuts. Epigraph bisection on the
/// target delay T; feasibility of T is a separable convex problem solved by
/// bisection on the bandwidth price. `incumbent`, when given, is a plan with
/// the same cuts whose delay is already achievable; the result is never worse
/// than it or than the equal-bandwidth plan.
AllocationPlan solve_parallel_resources(const NetworkInstance& net,
                                        std::span<const int> cuts,
                                        const SolverSettings& settings,
                                        const AllocationPlan* incumbent = nullptr);

/// Drops server compute from devices with no residual work, then scales the
/// remaining compute to f_max and bandwidth to B_tot. Never raises a delay.
AllocationPlan normalize_parallel_plan(const NetworkInstance& net,
                                       const AllocationPlan& plan);

/// Per-device argmin over cuts of J_{k,l} with B_k and f_{k,s} held.
std::vector<int> reselect_parallel_cuts(const NetworkInstance& net,
                                        const AllocationPlan& plan);

AllocationPlan solve_p1(const NetworkInstance& net,
                        const SolverSettings& settings);
AllocationPlan solve_p2(const NetworkInstance& net,
                        const SolverSettings& settings);
AllocationPlan min_data_layer_policy(const NetworkInstance& net,
                                     const SolverSettings& settings);
AllocationPlan first_layer_policy(const NetworkInstance& net,
                                  const SolverSettings& settings);

}  // namespace splitplan

#endif  // SPLITPLAN_PARALLEL_HPP_
