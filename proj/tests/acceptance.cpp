// Acceptance checks A1-A9. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bittide/buffers.hpp"
#include "bittide/controller.hpp"
#include "bittide/engine.hpp"
#include "bittide/experiment.hpp"

using namespace bittide;

namespace {

// Tolerances.
constexpr double kBandPpm = 1.0;
constexpr double kA1PastConvergenceS = 2.0;
constexpr double kA1WallS = 60.0;
constexpr double kA2BandTimeS = 0.6;
constexpr double kA2WallS = 30.0;
constexpr std::int64_t kA3Increase = 1230;
constexpr std::int64_t kA3Tolerance = 10;
constexpr std::int64_t kA3RttLo = 67;
constexpr std::int64_t kA3RttHi = 70;
constexpr std::uint64_t kA4MinFrames = 100000;
constexpr double kA5MinDurationS = 0.01;
constexpr std::size_t kA5MinInstants = 10000;
constexpr int kA8MaxWidth = 16;
constexpr int kA8TraceSteps = 1000000;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Telemetry run_suite(const std::string& name, SuiteScale scale, double& wall) {
  const ExperimentConfig cfg = suite_config(name, scale);
  const auto start = std::chrono::steady_clock::now();
  Telemetry t = run_engine(cfg.sim, cfg.engine);
  wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

Verdict a1() {
  Verdict v;
  double wall = 0;
  const Telemetry t = run_suite("fully_connected", SuiteScale::desk, wall);
  const auto s = convergence_stats(t, kBandPpm);
  v.require(!t.fault, "run faulted");
  v.require(s.time_to_band.has_value(), "never entered the 1 ppm band");
  if (s.time_to_band) {
    const double past = t.duration_s - *s.time_to_band;
    v.note("in band from " + num(*s.time_to_band) + " s, " + num(past) + " s past convergence");
    v.require(past >= kA1PastConvergenceS, "less than 2 s simulated past convergence");
  }
  double worst = 0;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    if (s.time_to_band && s.times[k] >= *s.time_to_band) worst = std::max(worst, s.spread_ppm[k]);
  }
  v.require(worst <= kBandPpm, "spread left the band");
  v.note("max spread after convergence " + num(worst) + " ppm, wall " + num(wall) + " s");
  v.require(wall < kA1WallS, "wall clock above 60 s");
  return v;
}

Verdict a2() {
  Verdict v;
  double wall = 0;
  const Telemetry t = run_suite("realistic", SuiteScale::desk, wall);
  const auto s = convergence_stats(t, kBandPpm);
  v.require(!t.fault, "run faulted");
  v.require(s.time_to_band.has_value() && *s.time_to_band <= kA2BandTimeS, "not below 1 ppm by 600 ms");
  if (s.time_to_band) v.note("below 1 ppm from " + num(*s.time_to_band) + " s");
  v.note("wall " + num(wall) + " s");
  v.require(wall < kA2WallS, "wall clock above 30 s");
  return v;
}

Verdict a3() {
  Verdict v;
  double wall = 0;
  const Telemetry t = run_suite("long_link", SuiteScale::desk, wall);
  v.require(!t.fault, "run faulted");
  if (t.fault) return v;
  const std::int64_t long_rtt = rtt_logical_latency(t, 0, 2);
  const std::int64_t reference = rtt_logical_latency(t, 0, 1);
  v.note("rtt(0,2) " + std::to_string(long_rtt) + ", rtt(0,1) " + std::to_string(reference));
  v.require(std::abs(long_rtt - reference - kA3Increase) <= kA3Tolerance, "increase outside 1230 +- 10");
  std::int64_t lo = 1 << 30, hi = -lo;
  for (NodeId i = 0; i < t.n_nodes; ++i) {
    for (NodeId j = 0; j < t.n_nodes; ++j) {
      if (i == j) continue;
      const std::int64_t r = rtt_logical_latency(t, i, j);
      v.require(r == rtt_logical_latency(t, j, i), "asymmetric round trip");
      if ((i == 0 && j == 2) || (i == 2 && j == 0)) continue;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  v.note("other rtts in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  v.require(lo >= kA3RttLo && hi <= kA3RttHi, "short-link rtt outside 67-70");
  return v;
}

SimConfig oracle_net(std::size_t n, double duration, std::uint64_t seed) {
  SimConfig c;
  c.topology = generate(TopologyKind::complete, {n, {}}, 10e-9);
  c.duration_s = duration;
  c.cadence_s = duration / 20;
  c.seed = seed;
  c.clock.step_ppm = 0.1;
  c.controller.kp = 25;
  return c;
}

Verdict a4() {
  Verdict v;
  std::uint64_t checked = 0;
  for (std::size_t n : {2u, 3u}) {
    SimConfig c = oracle_net(n, 1e-3, 7 + n);
    const Telemetry t = discrete_oracle(c);
    for (const auto& link : t.links) {
      v.require(link.ledger.size() == 1, "more than one logical latency on a link");
      v.require(!link.ledger.empty() && link.ledger.front().frames >= kA4MinFrames, "too few frames");
      if (!link.ledger.empty()) checked += link.ledger.front().frames;
    }

    c.duration_s = 2e-3;
    c.mode = BufferMode::ddc_then_reframe;
    c.reframe_at_s = 1e-3;
    const Telemetry r = discrete_oracle(c);
    for (const auto& link : r.links) {
      v.require(link.ledger.size() == 2, "reframed link does not show exactly two latencies");
      if (link.ledger.size() != 2) continue;
      v.require(link.ledger[1].lambda - link.ledger[0].lambda == link.reframe_delta,
                "post-reframe shift differs from lambda_delta");
      v.require(link.ledger[0].frames >= kA4MinFrames && link.ledger[1].frames >= kA4MinFrames,
                "too few frames around reframe");
      checked += link.ledger[0].frames + link.ledger[1].frames;
    }
  }
  v.note(std::to_string(checked) + " frames checked");
  return v;
}

Verdict a5() {
  Verdict v;
  std::size_t instants = 0;
  for (std::size_t n : {2u, 3u, 4u}) {
    SimConfig c = oracle_net(n, kA5MinDurationS, 20 + n);
    c.record_measurements = true;
    const Telemetry model = simulate(c);
    const Telemetry frames = discrete_oracle(c);
    v.require(model.measurements.size() == frames.measurements.size(), "different measurement counts");
    std::size_t mismatch = 0;
    for (std::size_t k = 0; k < std::min(model.measurements.size(), frames.measurements.size()); ++k) {
      mismatch += model.measurements[k].t != frames.measurements[k].t ||
                  model.measurements[k].occupancy != frames.measurements[k].occupancy;
    }
    v.require(mismatch == 0, std::to_string(mismatch) + " mismatches on " + std::to_string(n) + " nodes");
    v.require(model.counts.measurements >= kA5MinInstants, "too few instants");
    instants += model.counts.measurements;
  }
  v.note(std::to_string(instants) + " measurement instants compared");
  return v;
}

Verdict a6() {
  Verdict v;
  const ExperimentConfig cfg = suite_config("hourglass", SuiteScale::desk);
  const Telemetry t = run_engine(cfg.sim, cfg.engine);
  const auto s = convergence_stats(t, kBandPpm, cfg.partition);
  v.require(!t.fault, "run faulted");
  v.require(s.time_to_band.has_value(), "global spread never below 1 ppm");
  for (std::size_t p = 0; p < s.part_time_to_band.size(); ++p) {
    const auto& part = s.part_time_to_band[p];
    v.require(part.has_value() && s.time_to_band && *part < *s.time_to_band,
              "clique " + std::to_string(p) + " not in band before the whole network");
    if (part) v.note("clique " + std::to_string(p) + " at " + num(*part) + " s");
  }
  if (s.time_to_band) v.note("global at " + num(*s.time_to_band) + " s");
  return v;
}

Verdict a7() {
  Verdict v;
  double wall = 0;
  const Telemetry t = run_suite("torus", SuiteScale::desk, wall);
  const auto s = convergence_stats(t, kBandPpm);
  const double step = t.step_ppm;
  v.require(!t.fault, "6x6x6 run faulted");
  v.require(s.time_to_band.has_value(), "6x6x6 never converged");
  if (s.time_to_band) {
    double worst_rise = 0;
    for (std::size_t k = 1; k < s.times.size(); ++k) {
      if (s.times[k - 1] < *s.time_to_band) continue;
      worst_rise = std::max(worst_rise, s.spread_ppm[k] - s.spread_ppm[k - 1]);
    }
    v.require(worst_rise <= 2 * step, "spread rose by more than 2 steps after the transient");
    v.note("6x6x6 in band from " + num(*s.time_to_band) + " s, largest rise " + num(worst_rise) + " ppm");
  }
  v.require(s.final_spread_ppm <= 2 * step + 1.0, "final spread above 2 f_s + 1 ppm");
  v.note("final " + num(s.final_spread_ppm) + " ppm, wall " + num(wall) + " s");

  double wall_full = 0;
  const Telemetry full = run_suite("torus", SuiteScale::full, wall_full);
  v.require(!full.fault, "22x22x22 run faulted");
  v.note("22x22x22 " + std::to_string(full.n_nodes) + " nodes ok in " + num(wall_full) + " s");
  return v;
}

Verdict a8() {
  Verdict v;
  for (int n = 1; n <= kA8MaxWidth; ++n) {
    const std::uint64_t mod = std::uint64_t{1} << n;
    bool ok = true;
    for (std::uint64_t x = 0; x < mod; ++x) {
      ok &= gray_decode(gray_encode(x)) == x && gray_encode(x) < mod;
      ok &= std::popcount(gray_encode(x) ^ gray_encode((x + 1) % mod)) == 1;
    }
    v.require(ok, "gray property at width " + std::to_string(n));
  }

  std::mt19937_64 rng(1);
  for (unsigned n : {4u, 6u, 16u}) {
    const std::uint64_t mod = std::uint64_t{1} << n;
    std::uint64_t truth = 0;
    ExtendedCounter ext{n, 0};
    bool ok = true;
    try {
      for (int k = 0; k < kA8TraceSteps; ++k) {
        truth += rng() % (mod / 2);
        ext = extend(ext, truth % mod);
        ok &= ext.extended == truth;
      }
    } catch (const SimulationFault&) {
      ok = false;
    }
    v.require(ok, "extension diverged at width " + std::to_string(n));
  }

  const ExtendedCounter tx{16, 5000};
  v.require(ddc_occupancy(tx, tx).value == 0, "equal counters do not read zero");
  v.require(ddc_occupancy({16, 5018}, tx).value == 18, "rx ahead should read positive");
  v.require(ddc_occupancy({16, 4997}, tx).value == -3, "rx behind should read negative");
  v.note("widths 1-16 exhaustive, 3 x 1e6-step traces");
  return v;
}

Verdict a9() {
  Verdict v;
  std::size_t cases = 0;
  for (double step : {0.01, 0.1}) {
    for (double c_rel : {0.0, 0.003, 0.25, -1.37, 4.2, -7.99}) {
      const auto reach = static_cast<std::size_t>(std::ceil(std::abs(c_rel) / step));
      ControllerState s;
      double lo = INFINITY, hi = -INFINITY;
      bool ok = true;
      for (std::size_t k = 1; k <= reach + 1000; ++k) {
        s = commit(s, decide(c_rel, s), step);
        if (k >= reach) {
          ok &= std::abs(s.c_est_ppm - c_rel) <= step * (1 + 1e-9);
          lo = std::min(lo, s.c_est_ppm);
          hi = std::max(hi, s.c_est_ppm);
        }
      }
      v.require(ok && hi - lo <= step * (1 + 1e-9), "tracking of " + num(c_rel) + " at step " + num(step));
      ++cases;
    }
  }
  v.note(std::to_string(cases) + " demands tracked");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"A1 frequency alignment (fully connected)", a1},
      {"A2 realistic convergence", a2},
      {"A3 long-link round trip", a3},
      {"A4 logical latency constancy", a4},
      {"A5 model-oracle equivalence", a5},
      {"A6 hourglass clique ordering", a6},
      {"A7 torus scaling", a7},
      {"A8 counter and encoding properties", a8},
      {"A9 quantized tracking", a9},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", name, secs, v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
