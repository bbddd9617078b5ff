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

#ifndef SPLITPLAN_ORACLE_HPP_
#define SPLITPLAN_ORACLE_HPP_

// Brute-force references for the solvers. Slow on purpose.

#include <cstdint>
#include <vector>

#include "splitplan/bisect.hpp"
#include "splitplan/delay.hpp"
#include "splitplan/parallel.hpp"

namespace splitplan {

struct GridSpec {
  int simplex_points = 101;  // bandwidth grid points per dimension
  int max_modules = 6;       // L guard for exhaustive cut enumeration
  int max_devices = 3;       // K guard
  std::int64_t scan_points = 1'000'000;

  void validate() const;
};

struct OracleResult {
  double objective = 0.0;
  std::vector<int> cuts;
  std::vector<double> bandwidths;
  std::vector<double> server_flops;  // empty for the serial oracle
  std::int64_t evaluated = 0;        // grid points visited
};

/// Minimum over cut tuples x bandwidth simplex grid of the parallel max-delay
/// with the equal-delay compute split. Throws TooLarge past the guards.
OracleResult oracle_parallel(const NetworkInstance& net, const GridSpec& grid);

/// Same grid with the serial queue evaluated exactly.
OracleResult oracle_serial(const NetworkInstance& net, const GridSpec& grid);

/// Samples q(x) - f_max on (0, min(f_b, f_max)] and returns the bracket of
/// its single sign change. Throws NoBracket when there is not exactly one.
Bracket dense_root_scan(const EqualDelayProblem& p, std::int64_t points);

}  // namespace splitplan

#endif  // SPLITPLAN_ORACLE_HPP_
