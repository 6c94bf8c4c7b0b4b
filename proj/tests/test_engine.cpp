#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "bittide/engine.hpp"
#include "bittide/experiment.hpp"

using namespace bittide;

namespace {

SimConfig small_net(std::size_t n, double duration) {
  SimConfig c;
  c.topology = generate(TopologyKind::complete, {n, {}}, 10e-9);
  c.duration_s = duration;
  c.cadence_s = duration / 10;
  c.clock.step_ppm = 0.1;
  c.controller.kp = 25;
  return c;
}

std::string freq_text(const Telemetry& t) {
  std::ostringstream out;
  write_freq_csv(out, t);
  write_buffers_csv(out, t);
  return out.str();
}

// Last sample of each node's frequency offset.
std::vector<double> final_offsets(const Telemetry& t) {
  std::vector<double> out(t.n_nodes);
  for (const auto& s : t.frequency) out[s.node] = s.freq_offset_ppm;
  return out;
}

}  // namespace

TEST_CASE("occupancy model on hand-built histories") {
  const double nominal = 125e6;
  const PhaseHistory a(0.0, Phase{0, 0.0}, nominal, -1e-6);
  const PhaseHistory b(0.0, Phase{0, 0.0}, nominal, -1e-6);
  // Phase 125000.5 at t; the link reaches back one eighth of a tick.
  const double t = 1e-3 + 4e-9;
  CHECK(buffer_occupancy_model(a, b, 1e-9, 18, t) == 18);

  const PhaseHistory fast(0.0, Phase{0, 0.5}, nominal * (1 + 1e-6), -1e-6);
  const PhaseHistory slow(0.0, Phase{0, 0.5}, nominal, -1e-6);
  const std::int64_t start = buffer_occupancy_model(fast, slow, 1e-9, 0, 0.0);
  const std::int64_t later = buffer_occupancy_model(fast, slow, 1e-9, 0, 1.0);
  CHECK(std::abs((later - start) - 125) <= 1);
  CHECK_THROWS_AS(buffer_occupancy_model(fast, slow, 1e-3, 0, 0.0), QueryError);
}

TEST_CASE("a node without links keeps its frequency") {
  SimConfig c;
  c.topology = Topology(1, {});
  c.duration_s = 0.01;
  c.cadence_s = 0.001;
  c.clock.offsets_ppm = {3.5};
  const Telemetry t = simulate(c);
  CHECK(t.frequency.size() == 10);
  for (const auto& s : t.frequency) CHECK(s.freq_offset_ppm == 3.5);
  CHECK(t.counts.pulses == 0);
}

TEST_CASE("two nodes settle to a common band") {
  SimConfig c = small_net(2, 1.5);
  c.clock.offsets_ppm = {4.0, -4.0};
  c.cadence_s = 0.01;
  const Telemetry t = simulate(c);
  REQUIRE_FALSE(t.fault.has_value());
  const auto f = final_offsets(t);
  CHECK(std::abs(f[0] - f[1]) <= 2 * c.clock.step_ppm + 1e-9);

  std::map<NodeId, std::pair<std::int64_t, std::int64_t>> range;
  for (const auto& s : t.occupancy) {
    if (s.t < 1.0) continue;
    auto [it, fresh] = range.try_emplace(s.src, s.occupancy, s.occupancy);
    it->second.first = std::min(it->second.first, s.occupancy);
    it->second.second = std::max(it->second.second, s.occupancy);
  }
  REQUIRE(range.size() == 2);
  for (const auto& [src, r] : range) CHECK(r.second - r.first <= 4);
}

TEST_CASE("closed-form model agrees with the frame simulation") {
  for (std::size_t n : {2u, 3u, 4u}) {
    CAPTURE(n);
    SimConfig c = small_net(n, 6e-3);
    c.seed = 40 + n;
    c.record_measurements = true;
    c.record_pulses = true;
    const Telemetry model = simulate(c);
    const Telemetry frames = discrete_oracle(c);
    REQUIRE(model.measurements.size() == frames.measurements.size());
    std::size_t mismatches = 0;
    for (std::size_t k = 0; k < model.measurements.size(); ++k) {
      mismatches += model.measurements[k].occupancy != frames.measurements[k].occupancy ||
                    model.measurements[k].t != frames.measurements[k].t;
    }
    CHECK(mismatches == 0);
    CHECK(model.measurements.size() > 10000);
    CHECK(model.pulses.size() == frames.pulses.size());
    CHECK(freq_text(model) == freq_text(frames));
  }
}

TEST_CASE("delayed actuation") {
  SimConfig c = small_net(3, 6e-3);
  c.controller.delay_ticks = 40;
  c.record_measurements = true;
  c.record_pulses = true;
  const Telemetry model = simulate(c);
  const Telemetry frames = discrete_oracle(c);
  REQUIRE(model.measurements.size() == frames.measurements.size());
  for (std::size_t k = 0; k < model.measurements.size(); ++k) {
    REQUIRE(model.measurements[k].occupancy == frames.measurements[k].occupancy);
  }
  REQUIRE_FALSE(model.pulses.empty());
  CHECK(model.pulses.size() == frames.pulses.size());
  // Pulses land between measurement instants rather than on them.
  std::size_t on_measurement = 0;
  std::size_t m = 0;
  for (const auto& p : model.pulses) {
    while (m < model.measurements.size() && model.measurements[m].t < p.t) ++m;
    on_measurement += m < model.measurements.size() && model.measurements[m].t == p.t;
  }
  CHECK(on_measurement == 0);

  SimConfig longer = small_net(3, 1.5);
  longer.controller.delay_ticks = 100;
  longer.cadence_s = 0.01;
  const Telemetry settled = simulate(longer);
  REQUIRE_FALSE(settled.fault.has_value());
  const auto f = final_offsets(settled);
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  CHECK(*hi - *lo <= 2 * longer.clock.step_ppm + 1e-9);
}

TEST_CASE("frame simulation keeps one logical latency per link") {
  SimConfig c = small_net(3, 2e-3);
  const Telemetry t = discrete_oracle(c);
  REQUIRE_FALSE(t.fault.has_value());
  for (const auto& link : t.links) {
    REQUIRE(link.ledger.size() == 1);
    CHECK(link.ledger.front().lambda == link.lambda);
    CHECK(link.ledger.front().frames > 200000);
  }
  CHECK(t.counts.frames_received > 6 * 200000);
}

TEST_CASE("reframing shifts the logical latency by the reported delta") {
  SimConfig c = small_net(2, 2e-3);
  c.mode = BufferMode::ddc_then_reframe;
  c.reframe_at_s = 1e-3;
  c.clock.offsets_ppm = {2.0, -2.0};
  const Telemetry frames = discrete_oracle(c);
  const Telemetry model = simulate(c);
  REQUIRE_FALSE(frames.fault.has_value());
  REQUIRE(frames.reframe_time_s.has_value());
  for (std::size_t k = 0; k < frames.links.size(); ++k) {
    const auto& link = frames.links[k];
    REQUIRE(link.ledger.size() == 2);
    CHECK(link.ledger[0].lambda == link.lambda_initial);
    CHECK(link.ledger[1].lambda - link.ledger[0].lambda == link.reframe_delta);
    CHECK(model.links[k].reframe_delta == link.reframe_delta);
    CHECK(link.reframe_delta != 0);
  }
  // Right after recentering every buffer reads eb_init.
  for (const auto& s : frames.occupancy) {
    if (s.t >= *frames.reframe_time_s) {
      CHECK(s.elastic);
      CHECK(std::abs(s.occupancy - 18) <= 2);
    }
  }
}

TEST_CASE("swapping the fast node mirrors occupancies") {
  SimConfig a = small_net(2, 0.05);
  a.clock.initial_phases = {100.5, 100.5};
  a.clock.offsets_ppm = {3.0, -3.0};
  SimConfig b = a;
  b.clock.offsets_ppm = {-3.0, 3.0};
  const Telemetry ta = simulate(a);
  const Telemetry tb = simulate(b);
  std::map<std::pair<double, NodeId>, std::int64_t> mirrored;
  for (const auto& s : tb.occupancy) mirrored[{s.t, s.src}] = s.occupancy;
  for (const auto& s : ta.occupancy) CHECK(mirrored.at({s.t, s.node}) == s.occupancy);
}

TEST_CASE("elastic start holds eb_init frames") {
  SimConfig c = small_net(3, 1e-3);
  c.mode = BufferMode::elastic;
  c.controller.beta_off = 16;
  for (const Telemetry& t : {simulate(c), discrete_oracle(c)}) {
    for (const auto& s : t.occupancy) {
      if (s.t == 0.0) CHECK(s.occupancy == 18);
      CHECK(s.elastic);
    }
  }
}

TEST_CASE("identical seeds give identical telemetry") {
  SimConfig c = small_net(4, 0.05);
  c.seed = 99;
  CHECK(freq_text(simulate(c)) == freq_text(simulate(c)));
  SimConfig other = c;
  other.seed = 100;
  CHECK(freq_text(simulate(c)) != freq_text(simulate(other)));
}

TEST_CASE("pulses respect the minimum interval") {
  SimConfig c = small_net(4, 0.05);
  c.record_pulses = true;
  const Telemetry t = simulate(c);
  std::map<NodeId, double> last;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& p : t.pulses) {
    if (last.count(p.node)) min_gap = std::min(min_gap, p.t - last[p.node]);
    last[p.node] = p.t;
  }
  CHECK(min_gap >= c.clock.min_pulse_interval_s - kPulseTimeSlack);
  for (double g : t.min_pulse_gap_s) CHECK(g >= c.clock.min_pulse_interval_s - kPulseTimeSlack);
  CHECK(t.counts.pulses == t.pulses.size());
}

TEST_CASE("frequency samples follow the cadence") {
  SimConfig c = small_net(3, 0.1);
  c.cadence_s = 0.03;
  const Telemetry t = simulate(c);
  CHECK(t.frequency.size() == 4 * 3);
  CHECK(t.occupancy.size() == 4 * 6);
}

TEST_CASE("faults") {
  SUBCASE("uncontrolled elastic buffers overflow or underflow") {
    SimConfig c = small_net(2, 0.04);
    c.mode = BufferMode::elastic;
    c.controller.kp = 1e-9;
    c.clock.offsets_ppm = {8.0, -8.0};
    CHECK_THROWS_AS(simulate(c), SimulationFault);
    const Telemetry t = run_engine(c, EngineKind::model);
    REQUIRE(t.fault.has_value());
    CHECK((t.fault->kind == FaultKind::overflow || t.fault->kind == FaultKind::underflow));
    CHECK(t.fault->time_s < 0.01);
    const Telemetry f = run_engine(c, EngineKind::frames);
    REQUIRE(f.fault.has_value());
    CHECK(f.fault->kind == t.fault->kind);
  }
  SUBCASE("divergence guard") {
    SimConfig c = small_net(2, 0.2);
    c.controller.kp = -1;
    CHECK_THROWS_AS(c.check(), ConfigError);
    c.controller.kp = 25;
    c.clock.offsets_ppm = {8.0, -8.0};
    c.divergence_ppm = 5.0;
    const Telemetry t = run_engine(c, EngineKind::model);
    REQUIRE(t.fault.has_value());
    CHECK(t.fault->kind == FaultKind::divergence);
  }
}

TEST_CASE("configuration checks") {
  SimConfig c = small_net(2, 0.01);
  c.buffers.counter_bits = 6;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = small_net(2, 0.01);
  c.clock.offsets_ppm = {9.0, 0.0};
  CHECK_THROWS_AS(c.check(), ConfigError);
  c = small_net(2, 0.01);
  c.reframe_at_s = 0.005;
  CHECK_THROWS_AS(c.check(), ConfigError);
  c.mode = BufferMode::ddc_then_reframe;
  CHECK_NOTHROW(c.check());
  c.reframe_at_s.reset();
  CHECK_THROWS_AS(c.check(), ConfigError);
  CHECK_THROWS_AS(discrete_oracle(small_net(9, 0.01)), ConfigError);
  CHECK_THROWS_AS(discrete_oracle(small_net(2, 0.06)), ConfigError);
}

TEST_CASE("round trips") {
  SimConfig c = small_net(3, 0.0102);
  c.mode = BufferMode::ddc_then_reframe;
  c.reframe_at_s = 0.01;
  c.pipeline_frames = 15.25;
  const Telemetry t = simulate(c);
  REQUIRE_FALSE(t.fault.has_value());
  for (NodeId i = 0; i < 3; ++i) {
    for (NodeId j = 0; j < 3; ++j) {
      if (i == j) continue;
      const auto rtt = rtt_logical_latency(t, i, j);
      CHECK(rtt == rtt_logical_latency(t, j, i));
      CHECK(rtt >= 67);
      CHECK(rtt <= 70);
    }
  }
  CHECK_THROWS_AS(rtt_logical_latency(t, 0, 0), QueryError);

  CHECK(in_flight_estimate(1299, 18, 1231) == 32);
  CHECK(in_flight_estimate(69, 18, 1) == 32);
  CHECK(in_flight_estimate(32, 0, 0) == 32);
  CHECK_THROWS_AS(in_flight_estimate(30, 18, 1), ModelInconsistency);
}

TEST_CASE("zero-latency links hold exactly the pipeline") {
  SimConfig c;
  c.topology = Topology(2, {{0, 1, 1e-15}, {1, 0, 1e-15}});
  c.duration_s = 1e-3;
  c.cadence_s = 1e-4;
  c.clock.offsets_ppm = {0.0, 0.0};
  c.clock.initial_phases = {5.5, 9.25};
  c.pipeline_frames = 16;
  const Telemetry t = simulate(c);
  CHECK(rtt_logical_latency(t, 0, 1) == 32);
}

TEST_CASE("convergence statistics") {
  std::vector<FrequencySample> flat;
  for (int k = 0; k < 5; ++k) {
    for (NodeId n = 0; n < 3; ++n) flat.push_back({k * 0.1, n, 2.0, 0.0, 0});
  }
  const auto s = convergence_stats(flat, 3);
  CHECK(s.final_spread_ppm == 0.0);
  REQUIRE(s.time_to_band.has_value());
  CHECK(*s.time_to_band == 0.0);

  std::vector<FrequencySample> converging;
  const double spreads[] = {4.0, 0.5, 2.0, 0.8, 0.6};
  for (int k = 0; k < 5; ++k) {
    converging.push_back({k * 0.1, 0, 0.0, 0, 0});
    converging.push_back({k * 0.1, 1, spreads[k], 0, 0});
    converging.push_back({k * 0.1, 2, spreads[k] / 2, 0, 0});
  }
  const auto c = convergence_stats(converging, 3, 1.0, {{0, 2}, {1}});
  REQUIRE(c.time_to_band.has_value());
  CHECK(*c.time_to_band == doctest::Approx(0.3));
  CHECK(c.part_spread_ppm[1] == std::vector<double>(5, 0.0));
  CHECK(c.inter_part_spread_ppm[0] == doctest::Approx(3.0));
}
