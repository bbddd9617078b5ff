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

#include "splitplan/serial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "splitplan/bisect.hpp"
#include "splitplan/error.hpp"

namespace splitplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ArrivalTerms {
  double bits = 0.0;
  double local = 0.0;
  double gain = 0.0;
};

ArrivalTerms arrival_terms(const Device& d, int cut) {
  return {static_cast<double>(d.profile.payload_bits(cut)),
          static_cast<double>(d.profile.cum_workload[cut]) / d.compute_flops,
          d.link.gain_hz()};
}

double arrival_at(const ArrivalTerms& t, double bandwidth) {
  if (t.bits == 0.0) return t.local;
  const double rate = rate_from_gain(bandwidth, t.gain);
  return rate > 0.0 ? t.local + t.bits / rate : kInf;
}

// Least bandwidth reaching arrival <= target, or +inf when impossible.
double required_bandwidth(const ArrivalTerms& t, double target) {
  if (t.bits == 0.0) return t.local <= target ? 0.0 : kInf;
  const double budget = target - t.local;
  if (!(budget > 0.0)) return kInf;
  const double rate = t.bits / budget;
  if (rate * std::numbers::ln2 >= t.gain) return kInf;
  return bandwidth_bracket(t.gain, rate).hi;
}

std::vector<double> current_arrivals(const NetworkInstance& net,
                                     std::span<const int> cuts,
                                     std::span<const double> bandwidths) {
  std::vector<double> out(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    out[k] = arrival_delay(net.devices[k], cuts[k], bandwidths[k]);
  }
  return out;
}

std::vector<double> current_residuals(const NetworkInstance& net,
                                      std::span<const int> cuts) {
  std::vector<double> out(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    out[k] = residual_workload(net.devices[k].profile, cuts[k]);
  }
  return out;
}

AllocationPlan finish(AllocationPlan plan, const char* policy, int iterations,
                      std::vector<double> history) {
  plan.policy = policy;
  plan.iterations = iterations;
  plan.history = std::move(history);
  return plan;
}

}  // namespace

void SerialSettings::validate() const {
  solver.validate();
  if (heuristic_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "heuristic iterations must be >= 1");
  }
}

std::vector<double> simultaneous_arrival_bandwidth(
    const NetworkInstance& net, std::span<const int> cuts,
    const SolverSettings& settings) {
  const std::size_t n = net.size();
  if (cuts.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "need one cut per device");
  }
  std::vector<ArrivalTerms> terms;
  double lower = 0.0;
  double upper = 0.0;
  const double share = net.bandwidth_hz / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    terms.push_back(arrival_terms(net.devices[k], cuts[k]));
    lower = std::max(lower, arrival_at(terms.back(), net.bandwidth_hz));
    upper = std::max(upper, arrival_at(terms.back(), share));
  }
  if (!std::isfinite(upper)) {
    throw Error(ErrorCode::kInfeasible, "a device has a zero-rate link");
  }

  std::vector<double> need(n), best(n, share);
  auto feasible = [&](double target) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      need[k] = required_bandwidth(terms[k], target);
      sum += need[k];
      if (!(sum <= net.bandwidth_hz)) return false;
    }
    best = need;
    return true;
  };
  if (lower < upper && !feasible(lower)) {
    bisect(lower, upper, feasible, settings.bisection_tol, 200);
  } else {
    feasible(lower);
  }

  double used = 0.0;
  for (double b : best) used += b;
  if (used > 0.0) {
    for (double& b : best) b *= net.bandwidth_hz / used;
  } else {
    std::fill(best.begin(), best.end(), share);
  }
  return best;
}

std::vector<int> reselect_serial_cuts(const NetworkInstance& net,
                                      std::span<const int> cuts,
                                      std::span<const double> bandwidths,
                                      LayerRule rule) {
  std::vector<int> next(cuts.begin(), cuts.end());
  std::vector<double> arrivals = current_arrivals(net, next, bandwidths);
  for (std::size_t k = 0; k < net.size(); ++k) {
    double others = 0.0;
    for (std::size_t j = 0; j < net.size(); ++j) {
      if (j != k) others = std::max(others, arrivals[j]);
    }
    const Device& d = net.devices[k];
    int best = next[k];
    double best_score = kInf;
    for (int l = 0; l < d.profile.num_cuts(); ++l) {
      const double c = arrival_delay(d, l, bandwidths[k]);
      const double score =
          rule == LayerRule::kArrivalOnly
              ? c
              : std::max(c, others) +
                    residual_workload(d.profile, l) / net.server_flops;
      if (score < best_score) {
        best_score = score;
        best = l;
      }
    }
    next[k] = best;
    arrivals[k] = arrival_delay(d, best, bandwidths[k]);
  }
  return next;
}

namespace {

enum class Move { kDone, kStalledDonor, kNoData, kNoExcess, kUnreachable, kLater };

Move try_reallocate(const NetworkInstance& net, std::span<const int> cuts,
                    std::vector<double>& bandwidths, QueueState& queue,
                    std::size_t break_index, BreakReallocation& r) {
  const std::vector<std::size_t>& breaks = queue.breaks;
  const std::size_t first = breaks[break_index];
  r.donor = first - 1;
  r.receiver = breaks.back();
  r.donor_device = queue.order[r.donor];
  r.receiver_device = queue.order[r.receiver];

  const ArrivalTerms t =
      arrival_terms(net.devices[r.donor_device], cuts[r.donor_device]);
  const double target =
      queue.arrivals[first] - queue.residuals[r.donor] / queue.server_flops;
  const double budget = target - t.local;
  if (!(budget > 0.0)) return Move::kStalledDonor;
  if (t.bits == 0.0) return Move::kNoData;
  const double rate = t.bits / budget;
  if (!(t.gain > 0.0) || rate * std::numbers::ln2 >= t.gain) {
    return Move::kUnreachable;
  }
  // The lower end of the bracket keeps the donor's arrival at or just past
  // the target, so the break does not survive as a rounding-level gap.
  const Bracket br = bandwidth_bracket(t.gain, rate);
  r.donor_bandwidth = br.lo > 0.0 ? br.lo : br.hi;
  r.transferred = bandwidths[r.donor_device] - r.donor_bandwidth;
  if (!(r.transferred > 0.0)) return Move::kNoExcess;

  std::vector<double> next = bandwidths;
  next[r.donor_device] = r.donor_bandwidth;
  next[r.receiver_device] += r.transferred;
  QueueState rebuilt =
      build_queue(current_arrivals(net, cuts, next),
                  current_residuals(net, cuts), queue.server_flops);
  if (rebuilt.last_completion() > queue.last_completion()) return Move::kLater;
  bandwidths = std::move(next);
  queue = std::move(rebuilt);
  return Move::kDone;
}

}  // namespace

BreakReallocation reallocate_once(const NetworkInstance& net,
                                  std::span<const int> cuts,
                                  std::vector<double>& bandwidths,
                                  QueueState& queue, std::size_t break_index) {
  if (queue.breaks.size() < 2 || break_index + 1 >= queue.breaks.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "reallocation needs a break before the last one");
  }
  BreakReallocation r;
  switch (try_reallocate(net, cuts, bandwidths, queue, break_index, r)) {
    case Move::kDone:
      return r;
    case Move::kStalledDonor:
      throw Error(ErrorCode::kStalledBreak, "donor cannot meet its target");
    case Move::kNoData:
      throw Error(ErrorCode::kNoExcess, "donor sends no data");
    case Move::kNoExcess:
      throw Error(ErrorCode::kNoExcess, "donor has no excess bandwidth");
    case Move::kUnreachable:
      throw Error(ErrorCode::kUnreachable,
                  "donor target rate is above the link capacity ceiling");
    case Move::kLater:
      throw Error(ErrorCode::kStalledBreak,
                  "reallocation would delay the last completion");
  }
  return r;
}

namespace {

AllocationPlan p3_from(const NetworkInstance& net,
                       const SerialSettings& settings, std::vector<int> cuts) {
  const SolverSettings& s = settings.solver;
  AllocationPlan best;
  std::vector<double> history;
  int iteration = 0;
  while (iteration < s.max_iterations) {
    const std::vector<double> bw = simultaneous_arrival_bandwidth(net, cuts, s);
    AllocationPlan plan = evaluate_serial(net, cuts, bw);
    ++iteration;
    const double previous = history.empty() ? kInf : best.objective_s;
    if (history.empty() || plan.objective_s < best.objective_s) best = plan;
    history.push_back(best.objective_s);
    if (iteration >= s.max_iterations) break;
    if (std::isfinite(previous) &&
        previous - best.objective_s <= s.stall_tol * best.objective_s) {
      break;
    }
    std::vector<int> next =
        reselect_serial_cuts(net, cuts, bw, settings.layer_rule);
    if (next == cuts) break;
    cuts = std::move(next);
  }
  return finish(std::move(best), "p3", iteration, std::move(history));
}

AllocationPlan heuristic_from(const NetworkInstance& net,
                              const SerialSettings& settings,
                              std::vector<int> cuts) {
  const std::size_t n = net.size();
  const std::size_t keep = settings.strict_breaks ? 1 : 2;
  const std::size_t max_moves = 4 * n + 4;
  AllocationPlan best;
  bool have_best = false;
  std::vector<double> history;
  auto consider = [&](AllocationPlan plan) {
    if (!have_best || plan.objective_s < best.objective_s) {
      best = std::move(plan);
      have_best = true;
    }
  };

  int iteration = 0;
  while (iteration < settings.heuristic_iterations) {
    ++iteration;
    std::vector<double> bw(n, net.bandwidth_hz / static_cast<double>(n));
    QueueState queue = build_queue(current_arrivals(net, cuts, bw),
                                   current_residuals(net, cuts),
                                   net.server_flops);
    for (std::size_t moves = 0;
         queue.breaks.size() > keep && moves < max_moves; ++moves) {
      bool moved = false;
      BreakReallocation r;
      for (std::size_t b = 0; b + 1 < queue.breaks.size() && !moved; ++b) {
        moved = try_reallocate(net, cuts, bw, queue, b, r) == Move::kDone;
      }
      if (!moved) break;
    }
    consider(evaluate_serial(net, cuts, bw));
    std::vector<int> next =
        reselect_serial_cuts(net, cuts, bw, settings.layer_rule);
    if (next != cuts) consider(evaluate_serial(net, next, bw));
    history.push_back(best.objective_s);
    if (next == cuts) break;
    cuts = std::move(next);
  }
  return finish(std::move(best), "queue-heuristic", iteration,
                std::move(history));
}

template <class Run>
AllocationPlan best_start(const NetworkInstance& net,
                          const SerialSettings& settings, Run&& run) {
  net.validate();
  settings.validate();
  AllocationPlan best;
  for (std::vector<int>& start : starting_cuts(net, settings.solver)) {
    AllocationPlan plan = run(std::move(start));
    if (best.devices.empty() || plan.objective_s < best.objective_s) {
      best = std::move(plan);
    }
  }
  return best;
}

}  // namespace

AllocationPlan solve_p3(const NetworkInstance& net,
                        const SerialSettings& settings) {
  return best_start(net, settings, [&](std::vector<int> cuts) {
    return p3_from(net, settings, std::move(cuts));
  });
}

AllocationPlan queue_heuristic(const NetworkInstance& net,
                               const SerialSettings& settings) {
  return best_start(net, settings, [&](std::vector<int> cuts) {
    return heuristic_from(net, settings, std::move(cuts));
  });
}

AllocationPlan queue_first_layer_policy(const NetworkInstance& net,
                                        const SerialSettings& settings) {
  net.validate();
  settings.validate();
  const std::vector<int> cuts(net.size(), 0);
  const std::vector<double> bw =
      simultaneous_arrival_bandwidth(net, cuts, settings.solver);
  AllocationPlan plan = evaluate_serial(net, cuts, bw);
  const double objective = plan.objective_s;
  return finish(std::move(plan), "queue-first-layer", 1, {objective});
}

}  // namespace splitplan
