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

#include "splitplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "splitplan/error.hpp"

namespace splitplan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_guards(const NetworkInstance& net, const GridSpec& grid) {
  grid.validate();
  net.validate();
  if (static_cast<int>(net.size()) > grid.max_devices) {
    throw Error(ErrorCode::kTooLarge,
                "oracle limited to " + std::to_string(grid.max_devices) +
                    " devices");
  }
  for (const Device& d : net.devices) {
    if (d.profile.num_modules() > grid.max_modules) {
      throw Error(ErrorCode::kTooLarge,
                  "oracle limited to " + std::to_string(grid.max_modules) +
                      " modules");
    }
  }
}

// Calls visit(cuts) for every cut tuple, last device varying fastest.
void for_each_cut_tuple(const NetworkInstance& net,
                        const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> cuts(net.size(), 0);
  while (true) {
    visit(cuts);
    std::size_t k = net.size();
    while (k > 0) {
      --k;
      if (++cuts[k] < net.devices[k].profile.num_cuts()) break;
      cuts[k] = 0;
      if (k == 0) return;
    }
  }
}

// Calls visit(units) for every composition of `total` into net.size() parts.
void for_each_composition(std::size_t parts, int total,
                          const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> units(parts, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int left) {
    if (k + 1 == parts) {
      units[k] = left;
      visit(units);
      return;
    }
    for (int u = 0; u <= left; ++u) {
      units[k] = u;
      rec(k + 1, left - u);
    }
  };
  rec(0, total);
}

double arrival_or_inf(const Device& d, int cut, double bandwidth) {
  const double bits = static_cast<double>(d.profile.payload_bits(cut));
  const double local =
      static_cast<double>(d.profile.cum_workload[cut]) / d.compute_flops;
  if (bits == 0.0) return local;
  const double rate = achievable_rate(bandwidth, d.link);
  return rate > 0.0 ? local + bits / rate : kInf;
}

template <class Score>
OracleResult grid_search(const NetworkInstance& net, const GridSpec& grid,
                         Score&& score) {
  check_guards(net, grid);
  const std::size_t n = net.size();
  const int steps = grid.simplex_points - 1;
  OracleResult best;
  best.objective = kInf;
  std::vector<double> bw(n), arrivals(n), residuals(n), flops;
  for_each_cut_tuple(net, [&](const std::vector<int>& cuts) {
    for (std::size_t k = 0; k < n; ++k) {
      residuals[k] = residual_workload(net.devices[k].profile, cuts[k]);
    }
    auto visit = [&](const std::vector<int>& units) {
      ++best.evaluated;
      for (std::size_t k = 0; k < n; ++k) {
        bw[k] = n == 1 ? net.bandwidth_hz
                       : net.bandwidth_hz * units[k] / steps;
        arrivals[k] = arrival_or_inf(net.devices[k], cuts[k], bw[k]);
        if (!std::isfinite(arrivals[k])) return;
      }
      const double value = score(arrivals, residuals, flops);
      if (value < best.objective) {
        best.objective = value;
        best.cuts = cuts;
        best.bandwidths = bw;
        best.server_flops = flops;
      }
    };
    if (n == 1) {
      visit({steps});
    } else {
      for_each_composition(n, steps, visit);
    }
  });
  return best;
}

}  // namespace

void GridSpec::validate() const {
  if (simplex_points < 2 || max_modules < 2 || max_devices < 2 ||
      scan_points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "grid sizes must be >= 2");
  }
}

OracleResult oracle_parallel(const NetworkInstance& net, const GridSpec& grid) {
  return grid_search(net, grid,
                     [&](const std::vector<double>& arrivals,
                         const std::vector<double>& residuals,
                         std::vector<double>& flops) {
                       const EqualDelayAllocation a = lemma1_allocate(
                           {arrivals, residuals, net.server_flops});
                       flops = a.server_flops;
                       return a.objective;
                     });
}

OracleResult oracle_serial(const NetworkInstance& net, const GridSpec& grid) {
  return grid_search(net, grid,
                     [&](const std::vector<double>& arrivals,
                         const std::vector<double>& residuals,
                         std::vector<double>&) {
                       return serial_delay(arrivals, residuals,
                                           net.server_flops);
                     });
}

Bracket dense_root_scan(const EqualDelayProblem& p, std::int64_t points) {
  const EqualDelayBounds b = equal_delay_bounds(p);
  if (b.active.size() < 2 || points < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "scan needs two devices with server work and two points");
  }
  const double fmax = p.server_flops;
  const double upper = std::min(b.bound, fmax);
  const bool open_right = b.bound <= fmax;
  int changes = 0;
  Bracket found;
  double prev_x = 0.0;
  bool prev_above = false;  // q(0) = 0 < f_max
  for (std::int64_t i = 1; i <= points; ++i) {
    const double x = upper * static_cast<double>(i) / static_cast<double>(points);
    const bool above = (i == points && open_right)
                           ? true
                           : equal_delay_q(p, b, x) >= fmax;
    if (above != prev_above) {
      ++changes;
      found = {prev_x, x, static_cast<int>(std::min<std::int64_t>(i, 1 << 30))};
    }
    prev_above = above;
    prev_x = x;
  }
  if (changes != 1) {
    throw Error(ErrorCode::kNoBracket,
                "expected one sign change, found " + std::to_string(changes));
  }
  return found;
}

}  // namespace splitplan
