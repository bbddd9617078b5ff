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

#include "splitplan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "splitplan/bisect.hpp"
#include "splitplan/error.hpp"
#include "splitplan/rng.hpp"

namespace splitplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-device constants of one fixed cut.
struct CutTerms {
  double bits = 0.0;      // D + tau
  double local = 0.0;     // cum_workload / f_k
  double residual = 0.0;  // F
  double gain = 0.0;      // c, hertz
};

CutTerms cut_terms(const Device& d, int cut, double gain) {
  const CutProfile& p = d.profile;
  return {static_cast<double>(p.payload_bits(cut)),
          static_cast<double>(p.cum_workload[cut]) / d.compute_flops,
          static_cast<double>(p.residual_workload(cut)), gain};
}

double transmit_time(const CutTerms& t, double bandwidth) {
  if (t.bits == 0.0) return 0.0;
  const double rate = rate_from_gain(bandwidth, t.gain);
  return rate > 0.0 ? t.bits / rate : kInf;
}

std::vector<double> device_gains(const NetworkInstance& net) {
  std::vector<double> gains;
  gains.reserve(net.size());
  for (const Device& d : net.devices) gains.push_back(d.link.gain_hz());
  return gains;
}

void check_cuts(const NetworkInstance& net, std::span<const int> cuts) {
  if (cuts.size() != net.size()) {
    throw Error(ErrorCode::kInvalidArgument, "need one cut per device");
  }
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    if (cuts[k] < 0 || cuts[k] >= net.devices[k].profile.num_cuts()) {
      throw Error(ErrorCode::kInvalidArgument, "cut index out of range");
    }
  }
}

// Feasibility oracle for a target delay T with fixed cuts.
//
// Device k meets T with bandwidth B and compute f iff
//   bits/R(B) + local + F/f <= T,
// so the least compute it needs for a given B is
//   f_k(B) = F / (beta - bits/R(B)),  beta = T - local,
// which is convex and decreasing in B. T is feasible iff the bandwidth split
// minimising sum f_k(B_k) keeps the sum within f_max. That split equalises
// the marginals -f_k'(B_k) = mu; mu is found by bisection.
class ResourceFeasibility {
 public:
  ResourceFeasibility(const NetworkInstance& net, std::vector<CutTerms> terms)
      : net_(net), terms_(std::move(terms)) {}

  bool operator()(double target, std::vector<double>& bw,
                  std::vector<double>& flops) const {
    const std::size_t n = terms_.size();
    const double total_bw = net_.bandwidth_hz;
    std::vector<double> beta(n), bmin(n);
    std::vector<std::size_t> active;
    double fixed_flops = 0.0;
    double reserved_bw = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const CutTerms& t = terms_[k];
      beta[k] = target - t.local;
      if (t.bits == 0.0 && t.residual == 0.0) {
        if (beta[k] < 0.0) return false;
        bmin[k] = 0.0;
        continue;
      }
      if (!(beta[k] > 0.0)) return false;
      if (t.bits == 0.0) {
        bmin[k] = 0.0;
        fixed_flops += t.residual / beta[k];
        continue;
      }
      const double rate = t.bits / beta[k];
      if (rate * std::numbers::ln2 >= t.gain) return false;
      bmin[k] = bandwidth_bracket(t.gain, rate).hi;
      if (t.residual == 0.0) {
        reserved_bw += bmin[k];
      } else {
        active.push_back(k);
      }
    }
    bw.assign(bmin.begin(), bmin.end());
    flops.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (terms_[k].bits == 0.0 && terms_[k].residual > 0.0) {
        flops[k] = terms_[k].residual / beta[k];
      }
    }
    if (reserved_bw > total_bw) return false;
    if (active.empty()) return fixed_flops <= net_.server_flops;

    const double budget = total_bw - reserved_bw;
    double min_sum = 0.0;
    for (std::size_t k : active) min_sum += bmin[k];
    const double slack = budget - min_sum;
    if (!(slack > 0.0)) return false;

    double mu_lo = kInf, mu_hi = 0.0;
    for (std::size_t k : active) {
      const double ref = bmin[k] + slack / static_cast<double>(active.size());
      const double m = marginal(k, ref, beta[k]);
      mu_lo = std::min(mu_lo, m);
      mu_hi = std::max(mu_hi, m);
    }
    auto spend = [&](double mu) {
      double sum = 0.0;
      for (std::size_t k : active) {
        sum += bandwidth_at_price(k, mu, beta[k], bmin[k]);
      }
      return sum;
    };
    double mu = mu_hi;
    if (mu_lo < mu_hi && mu_lo > 0.0) {
      mu = bisect_log(mu_lo, mu_hi,
                      [&](double m) { return spend(m) <= budget; }, 1e-10)
               .hi;
    }
    double spent = 0.0;
    for (std::size_t k : active) {
      bw[k] = bandwidth_at_price(k, mu, beta[k], bmin[k]);
      spent += bw[k];
    }
    if (spent > budget) {
      // Inner tolerance overshoot: pull every share back toward its minimum.
      const double scale = slack / (spent - min_sum);
      for (std::size_t k : active) bw[k] = bmin[k] + (bw[k] - bmin[k]) * scale;
    }
    double used = fixed_flops;
    for (std::size_t k : active) {
      const double room = beta[k] - transmit_time(terms_[k], bw[k]);
      if (!(room > 0.0)) return false;
      flops[k] = terms_[k].residual / room;
      used += flops[k];
    }
    return used <= net_.server_flops;
  }

 private:
  // -d f_k / d B at B for budget beta.
  double marginal(std::size_t k, double bandwidth, double beta) const {
    const CutTerms& t = terms_[k];
    const double rate = rate_from_gain(bandwidth, t.gain);
    if (!(rate > 0.0)) return kInf;
    const double room = beta - t.bits / rate;
    if (!(room > 0.0)) return kInf;
    const double slope = rate_slope_from_gain(bandwidth, t.gain);
    return t.residual * t.bits * slope / (rate * rate * room * room);
  }

  double bandwidth_at_price(std::size_t k, double mu, double beta,
                            double bmin) const {
    const double cap = net_.bandwidth_hz;
    if (marginal(k, cap, beta) >= mu) return cap;
    return bisect(bmin, cap,
                  [&](double b) { return marginal(k, b, beta) <= mu; }, 1e-12)
        .hi;
  }

  const NetworkInstance& net_;
  std::vector<CutTerms> terms_;
};

// Shared driver for the alternating solvers: a resource step for the current
// cuts, then cut re-selection for the next iteration. Keeps the best plan.
template <class ResourceStep, class Reselect>
AllocationPlan alternate(const NetworkInstance& net,
                         const SolverSettings& settings, std::vector<int> cuts,
                         ResourceStep&& resources, Reselect&& reselect) {
  AllocationPlan best;
  std::vector<double> history;
  const AllocationPlan* incumbent = nullptr;
  AllocationPlan held;
  int iteration = 0;
  while (iteration < settings.max_iterations) {
    AllocationPlan plan = resources(cuts, incumbent);
    ++iteration;
    const double previous = history.empty() ? kInf : best.objective_s;
    if (history.empty() || plan.objective_s < best.objective_s) best = plan;
    history.push_back(best.objective_s);
    if (iteration >= settings.max_iterations) break;
    if (std::isfinite(previous) &&
        previous - best.objective_s <= settings.stall_tol * best.objective_s) {
      break;
    }
    std::vector<int> next = reselect(plan, held);
    if (next == cuts) break;
    cuts = std::move(next);
    incumbent = held.devices.empty() ? nullptr : &held;
  }
  (void)net;
  best.iterations = iteration;
  best.history = std::move(history);
  return best;
}

AllocationPlan reselect_and_hold(const NetworkInstance& net,
                                 const AllocationPlan& plan,
                                 std::vector<int>& next) {
  next = reselect_parallel_cuts(net, plan);
  AllocationPlan held = plan;
  for (std::size_t k = 0; k < net.size(); ++k) held.devices[k].cut = next[k];
  return normalize_parallel_plan(net, held);
}

}  // namespace

void SolverSettings::validate() const {
  if (!(bisection_tol > 0.0) || !(stall_tol >= 0.0) || max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "solver settings must be positive");
  }
}

EqualDelayBounds equal_delay_bounds(const EqualDelayProblem& p) {
  EqualDelayBounds b;
  for (std::size_t k = 0; k < p.residuals.size(); ++k) {
    if (p.residuals[k] != 0.0) b.active.push_back(k);
  }
  if (b.active.empty()) return b;
  std::size_t anchor = b.active.front();
  for (std::size_t k : b.active) {
    if (p.arrivals[k] < p.arrivals[anchor]) anchor = k;
  }
  return equal_delay_bounds(p, anchor);
}

EqualDelayBounds equal_delay_bounds(const EqualDelayProblem& p,
                                    std::size_t anchor) {
  if (p.arrivals.size() != p.residuals.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "arrivals and residuals differ in length");
  }
  EqualDelayBounds b;
  for (std::size_t k = 0; k < p.residuals.size(); ++k) {
    if (p.residuals[k] != 0.0) b.active.push_back(k);
  }
  if (anchor >= p.residuals.size() || p.residuals[anchor] == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "anchor must have server work");
  }
  b.anchor = anchor;
  const double fm = p.residuals[anchor];
  for (std::size_t k : b.active) {
    if (k == anchor) continue;
    const double dc = p.arrivals[anchor] - p.arrivals[k];
    if (dc != 0.0) b.bound = std::min(b.bound, -fm / dc);
  }
  return b;
}

double equal_delay_q(const EqualDelayProblem& p, const EqualDelayBounds& b,
                     double x) {
  const double fm = p.residuals[b.anchor];
  const double cm = p.arrivals[b.anchor];
  double q = x;
  for (std::size_t k : b.active) {
    if (k == b.anchor) continue;
    const double denom = fm + x * (cm - p.arrivals[k]);
    if (!(denom > 0.0)) return kInf;
    q += x * p.residuals[k] / denom;
  }
  return q;
}

EqualDelayAllocation lemma1_allocate(const EqualDelayProblem& p) {
  if (!(p.server_flops > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "server compute must be > 0");
  }
  const EqualDelayBounds b = equal_delay_bounds(p);
  EqualDelayAllocation out;
  out.server_flops.assign(p.residuals.size(), 0.0);
  double inactive_max = 0.0;
  for (std::size_t k = 0; k < p.residuals.size(); ++k) {
    if (p.residuals[k] == 0.0) {
      inactive_max = std::max(inactive_max, p.arrivals[k]);
    }
  }
  if (b.active.empty()) {
    out.empty_active = true;
    out.objective = inactive_max;
    out.common_delay = inactive_max;
    return out;
  }

  const double fmax = p.server_flops;
  double x0 = fmax;
  if (b.active.size() > 1) {
    // q(0) = 0, q increases to +inf at f_b and q(x) >= x, so the root lies in
    // (0, min(f_b, f_max)].
    const double upper = std::min(b.bound, fmax);
    const Bracket br = bisect(
        0.0, upper, [&](double x) { return equal_delay_q(p, b, x) >= fmax; },
        0.0, 2000);
    out.iterations = br.iterations;
    const double q_lo = equal_delay_q(p, b, br.lo);
    const double q_hi = equal_delay_q(p, b, br.hi);
    x0 = std::fabs(q_hi - fmax) <= std::fabs(fmax - q_lo) ? br.hi : br.lo;
    if (!(x0 > 0.0)) x0 = br.hi;
  }
  out.anchor_flops = x0;

  const double fm = p.residuals[b.anchor];
  const double cm = p.arrivals[b.anchor];
  double sum = 0.0;
  for (std::size_t k : b.active) {
    const double share =
        k == b.anchor
            ? x0
            : p.residuals[k] * x0 / (fm + x0 * (cm - p.arrivals[k]));
    if (!(share > 0.0) || !std::isfinite(share)) {
      throw Error(ErrorCode::kNonConvergence,
                  "equal-delay root produced a non-positive share");
    }
    out.server_flops[k] = share;
    sum += share;
  }
  const double scale = fmax / sum;
  double common = 0.0;
  for (std::size_t k : b.active) {
    out.server_flops[k] *= scale;
    common = std::max(common, p.arrivals[k] + p.residuals[k] / out.server_flops[k]);
  }
  out.common_delay = common;
  out.objective = std::max(common, inactive_max);
  return out;
}

Bracket bandwidth_bracket(double gain_hz, double rate_bps) {
  if (!(rate_bps > 0.0)) return {0.0, 0.0, 0};
  if (!(gain_hz > 0.0) || rate_bps * std::numbers::ln2 >= gain_hz) {
    throw Error(ErrorCode::kUnreachable,
                "rate " + std::to_string(rate_bps) +
                    " bit/s is at or above the link capacity ceiling");
  }
  double lo = 0.0;
  double hi = rate_bps;
  int grow = 0;
  while (rate_from_gain(hi, gain_hz) < rate_bps) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 2000 || !std::isfinite(hi)) {
      throw Error(ErrorCode::kNonConvergence,
                  "bandwidth bracket did not close");
    }
  }
  return bisect(lo, hi,
                [&](double b) { return rate_from_gain(b, gain_hz) >= rate_bps; },
                0.0, 2000);
}

double bandwidth_for_rate(const LinkParams& link, double rate_bps) {
  link.validate();
  if (rate_bps < 0.0) {
    throw Error(ErrorCode::kDomainError, "required rate must be >= 0");
  }
  return bandwidth_bracket(link.gain_hz(), rate_bps).hi;
}

int min_data_cut(const CutProfile& profile) {
  int best = 0;
  for (int l = 1; l < profile.num_cuts(); ++l) {
    if (profile.payload_bits(l) < profile.payload_bits(best)) best = l;
  }
  return best;
}

std::vector<int> initial_cuts(const NetworkInstance& net,
                              const SolverSettings& settings) {
  std::vector<int> cuts(net.size());
  const CounterRng rng(settings.init_seed);
  for (std::size_t k = 0; k < net.size(); ++k) {
    const CutProfile& p = net.devices[k].profile;
    cuts[k] = settings.init == InitMode::kMinData
                  ? min_data_cut(p)
                  : static_cast<int>(rng.bits(0, k, 0) %
                                     static_cast<std::uint64_t>(p.num_cuts()));
  }
  return cuts;
}

AllocationPlan normalize_parallel_plan(const NetworkInstance& net,
                                       const AllocationPlan& plan) {
  std::vector<int> cuts = plan.cuts();
  std::vector<double> bw = plan.bandwidths();
  std::vector<double> flops = plan.server_flops();
  double bw_sum = 0.0, flop_sum = 0.0;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (net.devices[k].profile.residual_workload(cuts[k]) == 0) flops[k] = 0.0;
    bw_sum += bw[k];
    flop_sum += flops[k];
  }
  if (bw_sum > 0.0) {
    for (double& b : bw) b *= net.bandwidth_hz / bw_sum;
  } else {
    std::fill(bw.begin(), bw.end(),
              net.bandwidth_hz / static_cast<double>(net.size()));
  }
  if (flop_sum > 0.0) {
    for (double& f : flops) f *= net.server_flops / flop_sum;
  }
  AllocationPlan out = evaluate_parallel(net, cuts, bw, flops);
  out.policy = plan.policy;
  return out;
}

std::vector<std::vector<int>> starting_cuts(const NetworkInstance& net,
                                            const SolverSettings& settings) {
  std::vector<std::vector<int>> starts = {initial_cuts(net, settings)};
  std::vector<int> raw(net.size(), 0);
  if (raw != starts.front()) starts.push_back(std::move(raw));
  return starts;
}

AllocationPlan fixed_bandwidth_resources(const NetworkInstance& net,
                                         std::span<const int> cuts) {
  check_cuts(net, cuts);
  const double share = net.bandwidth_hz / static_cast<double>(net.size());
  EqualDelayProblem p;
  p.server_flops = net.server_flops;
  for (std::size_t k = 0; k < net.size(); ++k) {
    p.arrivals.push_back(arrival_delay(net.devices[k], cuts[k], share));
    p.residuals.push_back(residual_workload(net.devices[k].profile, cuts[k]));
  }
  const EqualDelayAllocation alloc = lemma1_allocate(p);
  const std::vector<double> bw(net.size(), share);
  return evaluate_parallel(net, cuts, bw, alloc.server_flops);
}

AllocationPlan solve_parallel_resources(const NetworkInstance& net,
                                        std::span<const int> cuts,
                                        const SolverSettings& settings,
                                        const AllocationPlan* incumbent) {
  check_cuts(net, cuts);
  const std::vector<double> gains = device_gains(net);
  std::vector<CutTerms> terms;
  for (std::size_t k = 0; k < net.size(); ++k) {
    terms.push_back(cut_terms(net.devices[k], cuts[k], gains[k]));
  }

  AllocationPlan fallback = fixed_bandwidth_resources(net, cuts);
  if (incumbent != nullptr && incumbent->cuts() == fallback.cuts()) {
    AllocationPlan inc = normalize_parallel_plan(net, *incumbent);
    if (inc.objective_s < fallback.objective_s) fallback = std::move(inc);
  }

  // Every device alone with all resources bounds the optimum from below.
  double lower = 0.0;
  for (const CutTerms& t : terms) {
    lower = std::max(lower, t.local + transmit_time(t, net.bandwidth_hz) +
                                t.residual / net.server_flops);
  }
  const double upper = fallback.objective_s;

  const ResourceFeasibility feasible(net, terms);
  std::vector<double> bw, flops, best_bw, best_flops;
  bool found = false;
  if (lower < upper) {
    bisect(lower, upper,
           [&](double target) {
             if (!feasible(target, bw, flops)) return false;
             best_bw = bw;
             best_flops = flops;
             found = true;
             return true;
           },
           settings.bisection_tol, 200);
  }
  if (!found) return fallback;

  AllocationPlan plan;
  plan.devices.resize(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    plan.devices[k].cut = cuts[k];
    plan.devices[k].bandwidth_hz = best_bw[k];
    plan.devices[k].server_flops = best_flops[k];
  }
  plan = normalize_parallel_plan(net, plan);
  return plan.objective_s <= fallback.objective_s ? plan : fallback;
}

std::vector<int> reselect_parallel_cuts(const NetworkInstance& net,
                                        const AllocationPlan& plan) {
  std::vector<int> next(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Device& d = net.devices[k];
    const DeviceAllocation& a = plan.devices[k];
    const double gain = d.link.gain_hz();
    int best = a.cut;
    double best_delay = kInf;
    for (int l = 0; l < d.profile.num_cuts(); ++l) {
      const CutTerms t = cut_terms(d, l, gain);
      double delay = t.local + transmit_time(t, a.bandwidth_hz);
      if (t.residual > 0.0) {
        delay = a.server_flops > 0.0 ? delay + t.residual / a.server_flops
                                     : kInf;
      }
      if (delay < best_delay) {
        best_delay = delay;
        best = l;
      }
    }
    next[k] = best;
  }
  return next;
}

AllocationPlan solve_p1(const NetworkInstance& net,
                        const SolverSettings& settings) {
  net.validate();
  settings.validate();
  AllocationPlan best;
  for (const std::vector<int>& start : starting_cuts(net, settings)) {
    AllocationPlan plan = alternate(
        net, settings, start,
        [&](const std::vector<int>& cuts, const AllocationPlan* incumbent) {
          return solve_parallel_resources(net, cuts, settings, incumbent);
        },
        [&](const AllocationPlan& current, AllocationPlan& held) {
          std::vector<int> next;
          held = reselect_and_hold(net, current, next);
          return next;
        });
    if (best.devices.empty() || plan.objective_s < best.objective_s) {
      best = std::move(plan);
    }
  }
  best.policy = "p1";
  return best;
}

AllocationPlan solve_p2(const NetworkInstance& net,
                        const SolverSettings& settings) {
  net.validate();
  settings.validate();
  AllocationPlan best;
  for (const std::vector<int>& start : starting_cuts(net, settings)) {
    AllocationPlan plan = alternate(
        net, settings, start,
        [&](const std::vector<int>& cuts, const AllocationPlan*) {
          return fixed_bandwidth_resources(net, cuts);
        },
        [&](const AllocationPlan& current, AllocationPlan& held) {
          held = AllocationPlan{};
          return reselect_parallel_cuts(net, current);
        });
    if (best.devices.empty() || plan.objective_s < best.objective_s) {
      best = std::move(plan);
    }
  }
  best.policy = "p2";
  return best;
}

AllocationPlan min_data_layer_policy(const NetworkInstance& net,
                                     const SolverSettings& settings) {
  net.validate();
  settings.validate();
  std::vector<int> cuts(net.size());
  for (std::size_t k = 0; k < net.size(); ++k) {
    cuts[k] = min_data_cut(net.devices[k].profile);
  }
  AllocationPlan plan = solve_parallel_resources(net, cuts, settings);
  plan.policy = "min-data";
  plan.iterations = 1;
  plan.history = {plan.objective_s};
  return plan;
}

AllocationPlan first_layer_policy(const NetworkInstance& net,
                                  const SolverSettings& settings) {
  net.validate();
  settings.validate();
  const std::vector<int> cuts(net.size(), 0);
  AllocationPlan plan = solve_parallel_resources(net, cuts, settings);
  plan.policy = "first-layer";
  plan.iterations = 1;
  plan.history = {plan.objective_s};
  return plan;
}

}  // namespace splitplan
