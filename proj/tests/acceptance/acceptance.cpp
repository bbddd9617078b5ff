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

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "splitplan/harness.hpp"
#include "splitplan/oracle.hpp"
#include "splitplan/parallel.hpp"
#include "splitplan/serial.hpp"
#include "support.hpp"

namespace sp = splitplan;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kRootTol = 1e-9;
constexpr double kSumTol = 1e-9;
constexpr double kSpreadTol = 1e-6;
constexpr double kClosedFormTol = 1e-12;
constexpr double kWorkedTol = 1e-9;
constexpr double kOracleTol = 0.01;
constexpr double kHeuristicOracleTol = 0.05;
constexpr double kPolicyGapTol = 0.02;
constexpr double kIterationTol = 0.005;

constexpr int kEqualDelayProblems = 10'000;
constexpr std::int64_t kCoarseScan = 10'000;
constexpr int kFineScanProblems = 20;
constexpr std::int64_t kFineScan = 1'000'000;

struct Outcome {
  bool pass = true;
  std::string detail;

  int failures = 0;

  // Keeps the first few reasons.
  void fail(const std::string& why) {
    if (failures < 6) detail += (failures == 0 ? "" : "; ") + why;
    ++failures;
    pass = false;
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

Outcome equal_delay_suite() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_spread = 0.0;
  int solved = 0;
  for (int t = 0; t < kEqualDelayProblems; ++t) {
    const int n = 2 + static_cast<int>(rng() % 31);
    sp::EqualDelayProblem p;
    p.server_flops = 1e9 + 1e12 * u(rng);
    for (int k = 0; k < n; ++k) {
      p.arrivals.push_back(4 * u(rng));
      p.residuals.push_back(u(rng) < 0.1 ? 0.0 : 1e8 + 1e11 * u(rng));
    }
    sp::EqualDelayAllocation a;
    sp::Bracket scan{};
    try {
      a = sp::lemma1_allocate(p);
      if (a.empty_active) continue;
      if (sp::equal_delay_bounds(p).active.size() < 2) {
        // One device takes all server compute; there is no root to scan.
        if (a.server_flops != std::vector<double>(a.server_flops.size(), 0.0)) {
          const double sum = std::accumulate(a.server_flops.begin(),
                                             a.server_flops.end(), 0.0);
          if (sum != p.server_flops) o.fail("single active device share");
        }
        continue;
      }
      scan = sp::dense_root_scan(p, t < kFineScanProblems ? kFineScan : kCoarseScan);
    } catch (const sp::Error& e) {
      o.fail("problem " + std::to_string(t) + ": " + e.what());
      continue;
    }
    ++solved;
    if (a.anchor_flops < scan.lo * (1 - kRootTol) ||
        a.anchor_flops > scan.hi * (1 + kRootTol)) {
      o.fail("root outside scan bracket in problem " + std::to_string(t));
    }
    const sp::EqualDelayBounds b = sp::equal_delay_bounds(p);
    double sum = 0.0, lo = INFINITY, hi = 0.0;
    for (double f : a.server_flops) sum += f;
    for (std::size_t k : b.active) {
      if (!(a.server_flops[k] > 0.0)) o.fail("non-positive share");
      const double j = p.arrivals[k] + p.residuals[k] / a.server_flops[k];
      lo = std::min(lo, j);
      hi = std::max(hi, j);
    }
    if (rel(sum, p.server_flops) > kSumTol) o.fail("shares do not sum to f_max");
    worst_spread = std::max(worst_spread, (hi - lo) / hi);
  }
  if (worst_spread > kSpreadTol) o.fail("spread " + fmt(worst_spread));
  const double wall = seconds_since(t0);
  if (wall >= 30.0) o.fail("runtime " + fmt(wall) + " s");
  if (o.pass) {
    o.detail = std::to_string(solved) + " problems, max spread " +
               fmt(worst_spread) + ", " + fmt(wall) + " s";
  }
  return o;
}

Outcome worked_example() {
  Outcome o;
  const double r = std::sqrt(125.0);
  const sp::EqualDelayProblem p{{1.0, 2.0}, {10e9, 10e9}, 10e9};
  const sp::EqualDelayAllocation a = sp::lemma1_allocate(p);
  const double e0 = rel(a.server_flops[0], (15 - r) * 1e9);
  const double e1 = rel(a.server_flops[1], (r - 5) * 1e9);
  const double ed = rel(a.common_delay, 1 + 10 / (15 - r));
  const double worst = std::max({e0, e1, ed});
  if (worst > kWorkedTol) o.fail("relative error " + fmt(worst));
  if (o.pass) o.detail = "max relative error " + fmt(worst);
  return o;
}

Outcome queue_algebra() {
  Outcome o;
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 10'000; ++t) {
    const int n = 1 + static_cast<int>(rng() % 32);
    std::vector<double> c(n), f(n);
    for (int k = 0; k < n; ++k) {
      c[k] = 3 * u(rng);
      f[k] = 1e10 * u(rng);
    }
    std::sort(c.begin(), c.end());
    const double fmax = 1e9 + 3e11 * u(rng);
    const sp::QueueEvaluation e = sp::queue_completions(c, f, fmax);
    // Per sub-queue closed form: I_q = C_first + sum of services so far.
    std::vector<std::size_t> starts = {0};
    starts.insert(starts.end(), e.breaks.begin(), e.breaks.end());
    for (std::size_t s = 0; s < starts.size(); ++s) {
      const std::size_t end = s + 1 < starts.size() ? starts[s + 1] : c.size();
      double acc = c[starts[s]];
      for (std::size_t k = starts[s]; k < end; ++k) {
        acc += f[k] / fmax;
        worst = std::max(worst, rel(e.completions[k], acc));
      }
    }
    const double total = sp::broken_queue_total(c, f, fmax, e.breaks);
    worst = std::max(worst, rel(total, e.completions.back()));
  }
  if (worst > kClosedFormTol) o.fail("relative error " + fmt(worst));
  if (o.pass) o.detail = "max relative error " + fmt(worst);
  return o;
}

// Queue with one cut per device that ships everything; arrivals are set
// through the link rate and service is residual / f_max.
sp::NetworkInstance queue_network(const std::vector<double>& arrivals,
                                  const std::vector<double>& services) {
  const double bits = 1e8, per_device = 20e6, fmax = 1e9;
  sp::NetworkInstance net;
  net.server_flops = fmax;
  net.bandwidth_hz = per_device * static_cast<double>(arrivals.size());
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    const auto work = static_cast<sp::FlopCount>(std::llround(services[k] * fmax));
    net.devices.push_back(sp::testing::device_with_rate(
        bits / arrivals[k],
        sp::testing::make_profile({0, work}, {static_cast<sp::BitCount>(bits), 0},
                                  work),
        1e9, per_device));
  }
  return net;
}

// A sorted queue with at least two breaks and a device after the last one.
struct BrokenQueue {
  std::vector<double> c, s;  // arrivals, services (residual / f_max)
  sp::QueueEvaluation eval;
};

BrokenQueue random_broken_queue(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    BrokenQueue q;
    const int n = 4 + static_cast<int>(rng() % 12);
    double t = u(rng);
    for (int k = 0; k < n; ++k) {
      q.c.push_back(t);
      q.s.push_back(0.1 + u(rng));
      t += u(rng) < 0.3 ? 1.5 + u(rng) : 0.5 * u(rng);
    }
    q.eval = sp::queue_completions(q.c, q.s, 1.0);
    if (q.eval.breaks.size() >= 2 && q.eval.breaks.back() + 1 < q.c.size()) {
      return q;
    }
  }
}

Outcome broken_queue_suite() {
  Outcome o;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int cases[3] = {0, 0, 0};
  for (int t = 0; t < 1000; ++t) {
    const BrokenQueue q = random_broken_queue(rng);
    const std::vector<double>& I = q.eval.completions;
    const std::size_t first = q.eval.breaks.front();
    const std::size_t last = q.eval.breaks.back();
    auto prefix = [](const std::vector<double>& v, std::size_t n) {
      return std::vector<double>(v.begin(), v.begin() + static_cast<long>(n));
    };
    // Close the first break: the donor now completes exactly at C_first.
    std::vector<double> base = q.c;
    base[first - 1] = q.c[first] - q.s[first - 1];
    const double merged = I[last - 1] + q.s[last];

    // A: the last break disappears, nothing follows it.
    std::vector<double> a = prefix(base, last + 1);
    const std::vector<double> sa = prefix(q.s, last + 1);
    a[last] = I[last - 1];
    // B: the last break disappears and the next device now arrives late.
    std::vector<double> b = prefix(base, last + 2);
    const std::vector<double> sb = prefix(q.s, last + 2);
    b[last] = I[last - 1];
    b[last + 1] = merged + (I[last] - merged) * (0.05 + 0.9 * u(rng));
    // C: the last break stays but moves earlier, opening one more.
    std::vector<double> c = b;
    const double hi = std::min(q.c[last], b[last + 1] - q.s[last]);
    c[last] = I[last - 1] + (hi - I[last - 1]) * (0.05 + 0.9 * u(rng));

    const sp::QueueEvaluation ea = sp::queue_completions(a, sa, 1.0);
    const sp::QueueEvaluation eb = sp::queue_completions(b, sb, 1.0);
    const sp::QueueEvaluation ec = sp::queue_completions(c, sb, 1.0);
    const double total_a = I[last];
    const double total_bc = I[last + 1];
    const bool fa = ea.completions.back() < total_a;
    const bool fb = eb.completions.back() < total_bc;
    const bool fc = ec.completions.back() < total_bc;
    if (!fa) o.fail("case A not faster");
    if (!fb) o.fail("case B not faster");
    if (!fc) o.fail("case C not faster");
    if (!ea.breaks.empty() && ea.breaks.back() >= last) {
      o.fail("case A keeps its last break");
    }
    if (eb.breaks.empty() || eb.breaks.back() != last + 1 ||
        std::count(eb.breaks.begin(), eb.breaks.end(), last) != 0) {
      o.fail("case B break layout");
    }
    if (ec.breaks.size() < 2 || ec.breaks.back() != last + 1 ||
        ec.breaks[ec.breaks.size() - 2] != last) {
      o.fail("case C break layout");
    }
    cases[0] += fa;
    cases[1] += fb;
    cases[2] += fc;
  }

  // Reallocation through the bandwidth model.
  int moves = 0;
  for (int t = 0; t < 1000; ++t) {
    const BrokenQueue q = random_broken_queue(rng);
    const sp::NetworkInstance net = queue_network(q.c, q.s);
    const std::vector<int> cuts(q.c.size(), 0);
    std::vector<double> bw(q.c.size(), 20e6);
    std::vector<double> arrivals, residuals;
    for (std::size_t k = 0; k < q.c.size(); ++k) {
      arrivals.push_back(sp::arrival_delay(net.devices[k], 0, bw[k]));
      residuals.push_back(sp::residual_workload(net.devices[k].profile, 0));
    }
    sp::QueueState state = sp::build_queue(arrivals, residuals, net.server_flops);
    for (std::size_t b = 0; b + 1 < state.breaks.size();) {
      const double before = state.last_completion();
      try {
        sp::reallocate_once(net, cuts, bw, state, b);
        ++moves;
        const double sum = std::accumulate(bw.begin(), bw.end(), 0.0);
        if (rel(sum, net.bandwidth_hz) > kClosedFormTol) {
          o.fail("bandwidth not conserved");
        }
        if (state.last_completion() > before) o.fail("I_K increased");
      } catch (const sp::Error& e) {
        if (e.code() != sp::ErrorCode::kStalledBreak &&
            e.code() != sp::ErrorCode::kNoExcess) {
          o.fail(std::string("unexpected error: ") + e.what());
        }
        ++b;
      }
    }
  }
  if (o.pass) {
    o.detail = "transforms faster in " + std::to_string(cases[0]) + "/" +
               std::to_string(cases[1]) + "/" + std::to_string(cases[2]) +
               " of 1000; " + std::to_string(moves) + " reallocations";
  }
  return o;
}

sp::ExperimentConfig default_config() {
  return sp::load_experiment_config(
      sp::testing::config_path("default_experiment.json"));
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  sp::ExperimentConfig c = default_config();
  c.profile = sp::testing::toy_profile();
  c.devices = 2;
  const sp::GridSpec grid;
  double w1 = 0.0, w3 = 0.0, wh = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const sp::NetworkInstance net = sp::build_network(c, t);
    const double op = sp::oracle_parallel(net, grid).objective;
    const double os = sp::oracle_serial(net, grid).objective;
    w1 = std::max(w1, sp::solve_p1(net, c.settings.solver).objective_s / op - 1);
    w3 = std::max(w3, sp::solve_p3(net, c.settings).objective_s / os - 1);
    wh = std::max(wh, sp::queue_heuristic(net, c.settings).objective_s / os - 1);
  }
  const double wall = seconds_since(t0);
  if (w1 > kOracleTol) o.fail("P1 excess " + fmt(w1));
  if (w3 > kOracleTol) o.fail("P3 excess " + fmt(w3));
  if (wh > kHeuristicOracleTol) o.fail("heuristic excess " + fmt(wh));
  if (wall >= 300.0) o.fail("runtime " + fmt(wall) + " s");
  const std::string d = "worst excess over grid minimum P1 " + fmt(w1) +
                        ", P3 " + fmt(w3) + ", heuristic " + fmt(wh) + ", " +
                        fmt(wall) + " s";
  o.detail = o.pass ? d : o.detail + "; " + d;
  return o;
}

Outcome architecture_profile() {
  Outcome o;
  const sp::CutProfile& p = sp::testing::reference_profile();
  const sp::TensorShape& in = p.shapes.front();
  const sp::TensorShape& out = p.shapes.back();
  if (p.transmit_bits.front() != 201'326'592) o.fail("raw input size");
  if (out.channels != 20 || out.height != in.height || out.width != in.width) {
    o.fail("output shape");
  }
  const auto& d = p.transmit_bits;
  if (std::is_sorted(d.begin(), d.end()) || std::is_sorted(d.rbegin(), d.rend())) {
    o.fail("D is monotone");
  }
  if (o.pass) {
    o.detail = "raw input " + std::to_string(p.transmit_bits.front()) +
               " bits, output " + std::to_string(out.channels) + "x" +
               std::to_string(out.height) + "x" + std::to_string(out.width);
  }
  return o;
}

sp::SweepResult sweep(const sp::ExperimentConfig& base, sp::SweepParam param,
                      std::vector<double> values) {
  sp::ExperimentConfig c = base;
  c.sweep = param;
  c.sweep_values = std::move(values);
  return sp::run_sweep(c);
}

struct Sweeps {
  sp::SweepResult devices, bandwidth, iterations;
};

const std::vector<double> kDeviceGrid = {4, 6, 8, 10, 12, 14, 16};
const std::vector<double> kBandwidthGrid = {150e6, 200e6, 250e6,
                                            300e6, 350e6, 400e6};
const std::vector<double> kIterationGrid = {1, 2, 3, 4};

Sweeps run_all_sweeps(const sp::ExperimentConfig& c) {
  return {sweep(c, sp::SweepParam::kDevices, kDeviceGrid),
          sweep(c, sp::SweepParam::kBandwidth, kBandwidthGrid),
          sweep(c, sp::SweepParam::kIterations, kIterationGrid)};
}

void write_sweeps(const Sweeps& s, const fs::path& dir) {
  sp::write_tables(s.devices, dir);
  sp::write_tables(s.bandwidth, dir);
  sp::write_tables(s.iterations, dir);
}

double mean(const sp::SweepResult& r, double v, sp::Policy p) {
  const sp::SweepCell* cell = r.find(v, p);
  return cell && cell->failures == 0 ? cell->mean_delay_s : NAN;
}

Outcome figure_shapes(const Sweeps& s, double wall) {
  Outcome o;
  using sp::Policy;
  const std::vector<Policy> all = sp::all_policies();
  std::string a_notes;
  double worst_gap = 0.0;
  for (double k : kDeviceGrid) {
    for (Policy fl : {Policy::kFirstLayer, Policy::kQueueFirstLayer}) {
      for (Policy other : all) {
        if (other == Policy::kFirstLayer || other == Policy::kQueueFirstLayer) {
          continue;
        }
        if (!(mean(s.devices, k, fl) >= mean(s.devices, k, other))) {
          o.fail("(a) K=" + fmt(k) + ": " + std::string(sp::policy_name(fl)) +
                 " " + fmt(mean(s.devices, k, fl)) + " beats " +
                 std::string(sp::policy_name(other)) + " " +
                 fmt(mean(s.devices, k, other)));
        }
      }
    }
    const double p1 = mean(s.devices, k, Policy::kP1);
    const double p2 = mean(s.devices, k, Policy::kP2);
    const double gap = std::abs(p1 - p2) / std::min(p1, p2);
    worst_gap = std::max(worst_gap, gap);
    if (!(gap <= kPolicyGapTol)) {
      o.fail("(a) K=" + fmt(k) + ": P1/P2 gap " + fmt(gap));
    }
  }
  const double heur = mean(s.devices, 4, Policy::kQueueHeuristic);
  for (Policy p : all) {
    if (p != Policy::kQueueHeuristic && !(heur < mean(s.devices, 4, p))) {
      o.fail("(a) K=4: queue-heuristic " + fmt(heur) + " not below " +
             std::string(sp::policy_name(p)) + " " + fmt(mean(s.devices, 4, p)));
    }
  }
  for (Policy p : all) {
    for (std::size_t i = 1; i < kBandwidthGrid.size(); ++i) {
      const double prev = mean(s.bandwidth, kBandwidthGrid[i - 1], p);
      const double cur = mean(s.bandwidth, kBandwidthGrid[i], p);
      if (!(cur <= prev)) {
        o.fail("(b) " + std::string(sp::policy_name(p)) + " rises at B=" +
               fmt(kBandwidthGrid[i]));
      }
    }
  }
  double worst_step = 0.0;
  for (Policy p : {Policy::kP1, Policy::kP2, Policy::kP3, Policy::kQueueHeuristic}) {
    const double step = rel(mean(s.iterations, 4, p), mean(s.iterations, 3, p));
    worst_step = std::max(worst_step, step);
    if (!(step < kIterationTol)) {
      o.fail("(c) " + std::string(sp::policy_name(p)) + " changes " + fmt(step));
    }
  }
  if (wall >= 900.0) o.fail("runtime " + fmt(wall) + " s");
  const std::string d = "max P1/P2 gap " + fmt(worst_gap) +
                        ", max iteration 3->4 change " + fmt(worst_step) +
                        ", " + fmt(wall) + " s";
  o.detail = o.pass ? d : o.detail + "; " + d;
  return o;
}

Outcome scaling_ordinals() {
  Outcome o;
  using sp::Policy;
  const sp::ExperimentConfig c = default_config();
  const sp::ScalingReport r = sp::bench_scaling(
      c, {4, 16}, {Policy::kP1, Policy::kP2, Policy::kP3, Policy::kQueueHeuristic},
      9);
  const double g1 = r.growth(Policy::kP1), g2 = r.growth(Policy::kP2);
  const double g3 = r.growth(Policy::kP3), gh = r.growth(Policy::kQueueHeuristic);
  if (!(g2 < g1)) o.fail("P2 growth not below P1");
  if (!(gh < g3)) o.fail("heuristic growth not below P3");
  const std::string d = "growth K=4->16 P1 " + fmt(g1) + ", P2 " + fmt(g2) +
                        ", P3 " + fmt(g3) + ", heuristic " + fmt(gh);
  o.detail = o.pass ? d : o.detail + "; " + d;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& a, const fs::path& b) {
  Outcome o;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
      o.fail("differs: " + entry.path().filename().string());
    }
  }
  int other_files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++other_files;
  if (files != other_files) o.fail("file sets differ");
  if (files == 0) o.fail("no output files");
  if (o.pass) o.detail = std::to_string(files) + " files byte-identical";
  return o;
}

void report(int n, const std::string& name, const Outcome& o, bool& all) {
  std::printf("criterion %d %s: %s (%s)\n", n, name.c_str(),
              o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  all = all && o.pass;
}

Outcome guarded(const std::function<Outcome()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    Outcome o;
    o.fail(std::string("exception: ") + e.what());
    return o;
  }
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = fs::temp_directory_path() / "splitplan_acceptance";
  std::set<int> only;
  for (int i = 1; i + 1 < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out") {
      out = argv[++i];
    } else if (arg == "--only") {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) {
        only.insert(std::stoi(item));
      }
    }
  }
  auto selected = [&](int n) { return only.empty() || only.count(n) != 0; };
  fs::remove_all(out);
  bool all = true;
  auto run = [&](int n, const std::string& name,
                 const std::function<Outcome()>& body) {
    if (selected(n)) report(n, name, guarded(body), all);
  };
  run(1, "equal-delay allocation", equal_delay_suite);
  run(2, "worked closed form", worked_example);
  run(3, "queue algebra", queue_algebra);
  run(4, "broken-queue improvement", broken_queue_suite);
  run(5, "oracle equivalence", oracle_equivalence);
  run(6, "architecture profile", architecture_profile);

  Sweeps first;
  double first_wall = 0.0;
  bool swept = false;
  auto first_sweep = [&] {
    const auto t0 = std::chrono::steady_clock::now();
    first = run_all_sweeps(default_config());
    first_wall = seconds_since(t0);
    write_sweeps(first, out / "run1");
    swept = true;
  };
  run(7, "figure shapes", [&] {
    first_sweep();
    return figure_shapes(first, first_wall);
  });
  run(8, "scaling ordinals", scaling_ordinals);
  run(9, "determinism", [&] {
    if (!swept) first_sweep();
    write_sweeps(run_all_sweeps(default_config()), out / "run2");
    return determinism(out / "run1", out / "run2");
  });
  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
