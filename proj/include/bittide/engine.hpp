#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bittide/clock.hpp"
#include "bittide/controller.hpp"
#include "bittide/error.hpp"
#include "bittide/topology.hpp"

namespace bittide {

enum class BufferMode { ddc, elastic, ddc_then_reframe };

std::optional<BufferMode> parse_buffer_mode(const std::string& name);
std::string to_string(BufferMode mode);

struct ClockConfig {
  double nominal_hz = 125e6;
  double offset_bound_ppm = 8.0;
  std::vector<double> offsets_ppm;     ///< explicit per-node offsets; drawn from the seed if empty
  double step_ppm = 0.01;
  double min_pulse_interval_s = 1e-6;
  std::int64_t phase_spread = 1000;    ///< integer part of initial phases drawn from [0, spread)
  std::vector<double> initial_phases;  ///< explicit per-node initial phases (localticks)
};

struct BufferConfig {
  std::int64_t depth = 32;
  std::int64_t eb_init = 18;
  unsigned counter_bits = 16;
};

struct SimConfig {
  Topology topology;
  BufferMode mode = BufferMode::ddc;
  double duration_s = 1.0;
  std::uint64_t seed = 1;
  double cadence_s = 0.06;
  ClockConfig clock;
  ControllerParams controller;
  BufferConfig buffers;
  double pipeline_frames = 16.0;         ///< transceiver delay per direction
  double pipeline_jitter_frames = 0.0;   ///< per-link uniform jitter on the pipeline delay
  std::optional<double> reframe_at_s;
  double divergence_ppm = 196.0;
  bool record_measurements = false;
  bool record_pulses = false;

  /// Throws ConfigError on invalid combinations.
  void check() const;
  /// Physical latency plus transceiver pipeline of link `index`, before jitter.
  double effective_latency(std::size_t index) const;
};

struct FrequencySample {
  double t = 0.0;
  NodeId node = 0;
  double freq_offset_ppm = 0.0;
  double c_est_ppm = 0.0;
  std::int64_t net_steps = 0;
};

struct OccupancySample {
  double t = 0.0;
  NodeId node = 0;
  NodeId src = 0;
  std::int64_t occupancy = 0;
  bool elastic = false;  ///< false: DDC reading (0 = half full); true: real buffer
};

/// Occupancy observed by a controller at a measurement instant.
struct MeasurementRecord {
  double t = 0.0;
  std::size_t link = 0;
  std::int64_t occupancy = 0;
};

struct PulseRecord {
  double t = 0.0;
  NodeId node = 0;
  int direction = 0;
};

/// Consecutive received frames that shared one logical latency.
struct LambdaRun {
  std::int64_t lambda = 0;
  std::int64_t first_send_tick = 0;
  std::uint64_t frames = 0;
};

struct LinkRecord {
  NodeId src = 0;
  NodeId dst = 0;
  double latency_s = 0.0;           ///< effective latency used by the run
  std::int64_t lambda_initial = 0;
  std::int64_t lambda = 0;          ///< current logical latency (after any reframe)
  std::int64_t reframe_delta = 0;
  std::vector<LambdaRun> ledger;    ///< frame oracle only
};

struct EventCounts {
  std::uint64_t measurements = 0;
  std::uint64_t pulses = 0;
  std::uint64_t suppressed_pulses = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  std::uint64_t events = 0;
};

struct FaultRecord {
  FaultKind kind = FaultKind::accounting;
  double time_s = 0.0;
  std::string message;
};

struct Telemetry {
  std::size_t n_nodes = 0;
  double duration_s = 0.0;
  double cadence_s = 0.0;
  double step_ppm = 0.0;
  std::vector<FrequencySample> frequency;
  std::vector<OccupancySample> occupancy;
  std::vector<MeasurementRecord> measurements;
  std::vector<PulseRecord> pulses;
  std::vector<LinkRecord> links;
  std::vector<double> initial_offset_ppm;
  std::vector<double> min_pulse_gap_s;   ///< per node; +inf if fewer than two pulses
  std::optional<double> reframe_time_s;
  EventCounts counts;
  std::optional<FaultRecord> fault;
};

/// floor(theta_j(t - l)) - floor(theta_i(t)) + lambda
std::int64_t buffer_occupancy_model(const PhaseHistory& sender, const PhaseHistory& receiver,
                                    double latency_s, std::int64_t lambda, double t);

enum class EngineKind { model, frames };

/// Runs the network and records faults in Telemetry::fault instead of
/// throwing. Configuration errors still throw ConfigError.
Telemetry run_engine(const SimConfig& config, EngineKind kind);

/// Event-driven closed-form simulation. Throws SimulationFault on overflow,
/// underflow, counter accounting errors or divergence.
Telemetry simulate(const SimConfig& config);

/// Frame-level reference simulation: every frame is sent, flies, is queued
/// and popped. Limited to 8 nodes and 50 ms. Same fault behaviour as
/// simulate().
Telemetry discrete_oracle(const SimConfig& config);

/// lambda(i->j) + lambda(j->i). Throws QueryError if either direction is
/// missing.
std::int64_t rtt_logical_latency(const Telemetry& telemetry, NodeId i, NodeId j);

/// Frames held by the transceivers for a round trip:
///   rtt - 2 * eb_frames_per_side - flight_frames
/// Throws ModelInconsistency if negative.
std::int64_t in_flight_estimate(std::int64_t rtt, std::int64_t eb_frames_per_side,
                                std::int64_t flight_frames);

struct ConvergenceSummary {
  std::vector<double> times;
  std::vector<double> spread_ppm;                 ///< max pairwise spread per sample
  std::optional<double> time_to_band;             ///< first sample after which spread stays below band
  std::vector<std::vector<double>> part_spread_ppm;  ///< per partition, per sample
  std::vector<std::optional<double>> part_time_to_band;
  std::vector<double> inter_part_spread_ppm;      ///< spread of partition means per sample
  double final_spread_ppm = 0.0;
};

ConvergenceSummary convergence_stats(const Telemetry& telemetry, double band_ppm = 1.0,
                                     const std::vector<std::vector<NodeId>>& partition = {});

/// Same statistics from a frequency trace alone.
ConvergenceSummary convergence_stats(const std::vector<FrequencySample>& frequency,
                                     std::size_t n_nodes, double band_ppm = 1.0,
                                     const std::vector<std::vector<NodeId>>& partition = {});

}  // namespace bittide
