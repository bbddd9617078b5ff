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

#ifndef SPLITPLAN_DELAY_HPP_
#define SPLITPLAN_DELAY_HPP_

// Delay algebra shared by every policy.
//
// Units: seconds, hertz, FLOPs and FLOP/s throughout. Queue positions and
// break indices are 0-based positions in arrival order; a break at position p
// means job p arrives after job p - 1 has finished.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "splitplan/arch.hpp"
#include "splitplan/channel.hpp"

namespace splitplan {

struct Device {
  LinkParams link;
  double compute_flops = 30e9;  // f_k
  CutProfile profile;
};

struct NetworkInstance {
  std::vector<Device> devices;
  double server_flops = 300e9;    // f_max
  double bandwidth_hz = 200e6;    // B_tot

  std::size_t size() const { return devices.size(); }
  /// Throws ValidationError / DomainError on violated invariants.
  void validate() const;
};

struct DeviceAllocation {
  int cut = 0;
  double bandwidth_hz = 0.0;
  double server_flops = 0.0;  // f_{k,s}; zero for serial plans
  double arrival_s = 0.0;     // C_k
  double residual_flops = 0.0;  // F_k
  double total_s = 0.0;       // J_k (parallel) or completion I_k (serial)
};

struct AllocationPlan {
  std::string policy;
  bool serial = false;
  std::vector<DeviceAllocation> devices;
  double objective_s = 0.0;
  int iterations = 0;
  /// Best objective after each outer iteration.
  std::vector<double> history;

  std::vector<int> cuts() const;
  std::vector<double> bandwidths() const;
  std::vector<double> server_flops() const;
};

/// (D_l + tau_l) / R_k + cum_workload_l / f_k. Throws ZeroRate when bits must
/// be sent over a zero-rate link.
double arrival_delay(const Device& device, int cut, double bandwidth_hz);

/// Server FLOPs left after cutting at `cut` (F_k).
double residual_workload(const CutProfile& profile, int cut);

/// arrival_delay + residual / f_{k,s}. Throws MissingServerCompute when work is
/// left and f_{k,s} is zero.
double parallel_delay(const Device& device, int cut, double bandwidth_hz,
                      double server_flops);

struct QueueEvaluation {
  std::vector<double> completions;  // I_k per queue position
  std::vector<std::size_t> breaks;  // ascending positions
};

/// Serial-server recursion I_k = max(I_{k-1}, C_k) + F_k / f_max over jobs
/// already sorted by arrival.
QueueEvaluation queue_completions(std::span<const double> arrivals,
                                  std::span<const double> residuals,
                                  double server_flops);

/// Closed form of the last completion: C at the last break plus the service
/// of every job from there on (or from the head when there is no break).
/// Accumulates in the same order as the recursion so the two agree exactly.
double broken_queue_total(std::span<const double> arrivals,
                          std::span<const double> residuals,
                          double server_flops,
                          std::span<const std::size_t> breaks);

/// Arrival-ordered queue over the devices that still have server work.
struct QueueState {
  std::vector<std::size_t> order;  // device ids
  std::vector<double> arrivals;
  std::vector<double> residuals;
  std::vector<double> completions;
  std::vector<std::size_t> breaks;
  double server_flops = 0.0;

  std::size_t size() const { return order.size(); }
  double last_completion() const {
    return completions.empty() ? 0.0 : completions.back();
  }
};

/// Stable-sorts devices by arrival (ties by device id), drops devices with no
/// residual work and evaluates the recursion.
QueueState build_queue(std::span<const double> arrivals,
                       std::span<const double> residuals, double server_flops);

/// Serial completion of the whole round: the queue's last completion, or the
/// latest arrival of a device that finished everything locally.
double serial_delay(std::span<const double> arrivals,
                    std::span<const double> residuals, double server_flops);

/// Builds a fully evaluated plan from cuts, bandwidths and server shares.
AllocationPlan evaluate_parallel(const NetworkInstance& net,
                                 std::span<const int> cuts,
                                 std::span<const double> bandwidths,
                                 std::span<const double> server_flops);

/// Serial plan: total_s holds each device's completion under the queue.
AllocationPlan evaluate_serial(const NetworkInstance& net,
                               std::span<const int> cuts,
                               std::span<const double> bandwidths);

}  // namespace splitplan

#endif  // SPLITPLAN_DELAY_HPP_
