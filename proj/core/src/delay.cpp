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

#include "splitplan/delay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splitplan/error.hpp"

namespace splitplan {

void NetworkInstance::validate() const {
  if (devices.empty()) {
    throw Error(ErrorCode::kValidationError, "network has no devices");
  }
  if (!(server_flops > 0.0)) {
    throw Error(ErrorCode::kValidationError, "server compute must be > 0");
  }
  if (!(bandwidth_hz > 0.0)) {
    throw Error(ErrorCode::kValidationError, "total bandwidth must be > 0");
  }
  for (const Device& d : devices) {
    d.link.validate();
    if (!(d.compute_flops > 0.0)) {
      throw Error(ErrorCode::kValidationError, "device compute must be > 0");
    }
    if (d.profile.num_cuts() < 1) {
      throw Error(ErrorCode::kValidationError, "device has an empty profile");
    }
  }
}

std::vector<int> AllocationPlan::cuts() const {
  std::vector<int> out;
  for (const auto& d : devices) out.push_back(d.cut);
  return out;
}

std::vector<double> AllocationPlan::bandwidths() const {
  std::vector<double> out;
  for (const auto& d : devices) out.push_back(d.bandwidth_hz);
  return out;
}

std::vector<double> AllocationPlan::server_flops() const {
  std::vector<double> out;
  for (const auto& d : devices) out.push_back(d.server_flops);
  return out;
}

double arrival_delay(const Device& device, int cut, double bandwidth_hz) {
  const CutProfile& p = device.profile;
  if (cut < 0 || cut >= p.num_cuts()) {
    throw Error(ErrorCode::kInvalidArgument, "cut index out of range");
  }
  const double local =
      static_cast<double>(p.cum_workload[cut]) / device.compute_flops;
  const double bits = static_cast<double>(p.payload_bits(cut));
  if (bits == 0.0) return local;
  const double rate = achievable_rate(bandwidth_hz, device.link);
  if (rate <= 0.0) {
    throw Error(ErrorCode::kZeroRate,
                "payload of " + std::to_string(bits) +
                    " bits over a zero-rate link");
  }
  return bits / rate + local;
}

double residual_workload(const CutProfile& profile, int cut) {
  if (cut < 0 || cut >= profile.num_cuts()) {
    throw Error(ErrorCode::kInvalidArgument, "cut index out of range");
  }
  return static_cast<double>(profile.residual_workload(cut));
}

double parallel_delay(const Device& device, int cut, double bandwidth_hz,
                      double server_flops) {
  const double arrival = arrival_delay(device, cut, bandwidth_hz);
  const double residual = residual_workload(device.profile, cut);
  if (residual == 0.0) return arrival;
  if (!(server_flops > 0.0)) {
    throw Error(ErrorCode::kMissingServerCompute,
                "residual work with no server compute assigned");
  }
  return arrival + residual / server_flops;
}

QueueEvaluation queue_completions(std::span<const double> arrivals,
                                  std::span<const double> residuals,
                                  double server_flops) {
  QueueEvaluation out;
  out.completions.resize(arrivals.size());
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    const double service = residuals[k] / server_flops;
    if (k == 0) {
      out.completions[k] = arrivals[k] + service;
      continue;
    }
    if (out.completions[k - 1] < arrivals[k]) {
      out.breaks.push_back(k);
      out.completions[k] = arrivals[k] + service;
    } else {
      out.completions[k] = out.completions[k - 1] + service;
    }
  }
  return out;
}

double broken_queue_total(std::span<const double> arrivals,
                          std::span<const double> residuals,
                          double server_flops,
                          std::span<const std::size_t> breaks) {
  if (arrivals.empty()) return 0.0;
  const std::size_t start = breaks.empty() ? 0 : breaks.back();
  double total = arrivals[start];
  for (std::size_t k = start; k < arrivals.size(); ++k) {
    total += residuals[k] / server_flops;
  }
  return total;
}

QueueState build_queue(std::span<const double> arrivals,
                       std::span<const double> residuals,
                       double server_flops) {
  QueueState q;
  q.server_flops = server_flops;
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    if (residuals[k] > 0.0) q.order.push_back(k);
  }
  std::stable_sort(q.order.begin(), q.order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return arrivals[a] < arrivals[b];
                   });
  for (std::size_t id : q.order) {
    q.arrivals.push_back(arrivals[id]);
    q.residuals.push_back(residuals[id]);
  }
  QueueEvaluation eval = queue_completions(q.arrivals, q.residuals, server_flops);
  q.completions = std::move(eval.completions);
  q.breaks = std::move(eval.breaks);
  return q;
}

double serial_delay(std::span<const double> arrivals,
                    std::span<const double> residuals, double server_flops) {
  double local_only = 0.0;
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    if (residuals[k] <= 0.0) local_only = std::max(local_only, arrivals[k]);
  }
  const QueueState q = build_queue(arrivals, residuals, server_flops);
  return std::max(local_only, q.last_completion());
}

namespace {

void check_sizes(const NetworkInstance& net, std::size_t cuts,
                 std::size_t bandwidths) {
  if (cuts != net.size() || bandwidths != net.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "allocation vectors must have one entry per device");
  }
}

}  // namespace

AllocationPlan evaluate_parallel(const NetworkInstance& net,
                                 std::span<const int> cuts,
                                 std::span<const double> bandwidths,
                                 std::span<const double> server_flops) {
  check_sizes(net, cuts.size(), bandwidths.size());
  if (server_flops.size() != net.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "allocation vectors must have one entry per device");
  }
  AllocationPlan plan;
  plan.devices.resize(net.size());
  plan.objective_s = 0.0;
  for (std::size_t k = 0; k < net.size(); ++k) {
    DeviceAllocation& a = plan.devices[k];
    a.cut = cuts[k];
    a.bandwidth_hz = bandwidths[k];
    a.server_flops = server_flops[k];
    a.arrival_s = arrival_delay(net.devices[k], a.cut, a.bandwidth_hz);
    a.residual_flops = residual_workload(net.devices[k].profile, a.cut);
    a.total_s = parallel_delay(net.devices[k], a.cut, a.bandwidth_hz,
                               a.server_flops);
    plan.objective_s = std::max(plan.objective_s, a.total_s);
  }
  return plan;
}

AllocationPlan evaluate_serial(const NetworkInstance& net,
                               std::span<const int> cuts,
                               std::span<const double> bandwidths) {
  check_sizes(net, cuts.size(), bandwidths.size());
  AllocationPlan plan;
  plan.serial = true;
  plan.devices.resize(net.size());
  std::vector<double> arrivals(net.size());
  std::vector<double> residuals(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    DeviceAllocation& a = plan.devices[k];
    a.cut = cuts[k];
    a.bandwidth_hz = bandwidths[k];
    a.arrival_s = arrival_delay(net.devices[k], a.cut, a.bandwidth_hz);
    a.residual_flops = residual_workload(net.devices[k].profile, a.cut);
    a.total_s = a.arrival_s;
    arrivals[k] = a.arrival_s;
    residuals[k] = a.residual_flops;
  }
  const QueueState q = build_queue(arrivals, residuals, net.server_flops);
  for (std::size_t pos = 0; pos < q.size(); ++pos) {
    plan.devices[q.order[pos]].total_s = q.completions[pos];
  }
  plan.objective_s = 0.0;
  for (const auto& a : plan.devices) {
    plan.objective_s = std::max(plan.objective_s, a.total_s);
  }
  return plan;
}

}  // namespace splitplan
