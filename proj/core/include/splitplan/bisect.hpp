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

#ifndef SPLITPLAN_BISECT_HPP_
#define SPLITPLAN_BISECT_HPP_

#include <cmath>

namespace splitplan {

/// Invariant: pred(lo) is false and pred(hi) is true.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
};

/// Shrinks [lo, hi] around the switch point of a monotone predicate until the
/// width is below rel_tol * |hi| (or the midpoint is no longer representable
/// between the ends), or max_iterations is reached.
template <class Pred>
Bracket bisect(double lo, double hi, Pred&& pred, double rel_tol,
               int max_iterations = 400) {
  Bracket b{lo, hi, 0};
  while (b.iterations < max_iterations) {
    if (b.hi - b.lo <= rel_tol * std::fabs(b.hi)) break;
    const double mid = b.lo + 0.5 * (b.hi - b.lo);
    if (mid <= b.lo || mid >= b.hi) break;
    if (pred(mid)) {
      b.hi = mid;
    } else {
      b.lo = mid;
    }
    ++b.iterations;
  }
  return b;
}

/// Bisection on log(x) for strictly positive brackets spanning many decades.
template <class Pred>
Bracket bisect_log(double lo, double hi, Pred&& pred, double rel_tol,
                   int max_iterations = 400) {
  Bracket b{lo, hi, 0};
  while (b.iterations < max_iterations) {
    if (b.hi - b.lo <= rel_tol * b.hi) break;
    const double mid = std::sqrt(b.lo) * std::sqrt(b.hi);
    if (mid <= b.lo || mid >= b.hi) break;
    if (pred(mid)) {
      b.hi = mid;
    } else {
      b.lo = mid;
    }
    ++b.iterations;
  }
  return b;
}

}  // namespace splitplan

#endif  // SPLITPLAN_BISECT_HPP_
