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

#ifndef SPLITPLAN_RNG_HPP_
#define SPLITPLAN_RNG_HPP_

// Counter-based random numbers for Monte-Carlo trials.
//
// Every value is a pure function of (seed, trial, device, draw): the 256-bit
// counter is folded through the SplitMix64 finalizer, so trials can be
// generated in any order or concurrently and still match bit for bit across
// platforms. Exponential variates use -log1p(-u) with u a 53-bit uniform in
// [0, 1).

#include <cstdint>

namespace splitplan {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t bits(std::uint64_t trial, std::uint64_t device,
                               std::uint64_t draw) const {
    constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
    std::uint64_t h = splitmix64_mix(seed_ + kGamma);
    h = splitmix64_mix(h ^ (trial + kGamma));
    h = splitmix64_mix(h ^ (device + 2 * kGamma));
    h = splitmix64_mix(h ^ (draw + 3 * kGamma));
    return h;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t trial, std::uint64_t device,
                 std::uint64_t draw) const;

  /// Exponential with mean 1.
  double exponential(std::uint64_t trial, std::uint64_t device,
                     std::uint64_t draw) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Sequential view of one (trial, device) stream.
class FadingSampler {
 public:
  FadingSampler(std::uint64_t seed, std::uint64_t trial, std::uint64_t device)
      : rng_(seed), trial_(trial), device_(device) {}

  /// |h|^2 for h ~ CN(0, 1), i.e. Exponential(1).
  double next() { return rng_.exponential(trial_, device_, draw_++); }

 private:
  CounterRng rng_;
  std::uint64_t trial_;
  std::uint64_t device_;
  std::uint64_t draw_ = 0;
};

/// One block-fading draw per (trial, device).
double sample_fading(std::uint64_t seed, std::uint64_t trial,
                     std::uint64_t device);

}  // namespace splitplan

#endif  // SPLITPLAN_RNG_HPP_
