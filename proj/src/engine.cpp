#include "bittide/engine.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "bittide/buffers.hpp"
#include "frame_oracle.hpp"
#include "network.hpp"

namespace bittide {

std::string to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::overflow: return "overflow";
    case FaultKind::underflow: return "underflow";
    case FaultKind::accounting: return "accounting";
    case FaultKind::divergence: return "divergence";
  }
  return "?";
}

std::optional<BufferMode> parse_buffer_mode(const std::string& name) {
  if (name == "ddc") return BufferMode::ddc;
  if (name == "elastic") return BufferMode::elastic;
  if (name == "ddc_then_reframe") return BufferMode::ddc_then_reframe;
  return std::nullopt;
}

std::string to_string(BufferMode mode) {
  switch (mode) {
    case BufferMode::ddc: return "ddc";
    case BufferMode::elastic: return "elastic";
    case BufferMode::ddc_then_reframe: return "ddc_then_reframe";
  }
  return "?";
}

void SimConfig::check() const {
  const ValidationReport report = validate(topology);
  if (!report.ok()) throw ConfigError("invalid topology: " + report.errors.front());
  controller.check();
  const std::size_t n = topology.size();
  if (!(duration_s > 0.0)) throw ConfigError("sim.duration_s must be positive");
  if (!(cadence_s > 0.0)) throw ConfigError("telemetry.cadence_s must be positive");
  if (!(clock.nominal_hz > 0.0)) throw ConfigError("clock.nominal_hz must be positive");
  if (!(clock.step_ppm > 0.0)) throw ConfigError("clock.step_ppm must be positive");
  if (clock.phase_spread < 1) throw ConfigError("clock.phase_spread must be >= 1");
  if (!clock.offsets_ppm.empty()) {
    if (clock.offsets_ppm.size() != n) throw ConfigError("clock.offsets_ppm needs one value per node");
    for (double o : clock.offsets_ppm) {
      if (std::abs(o) > clock.offset_bound_ppm) {
        throw ConfigError("clock offset " + std::to_string(o) + " ppm exceeds the bound of " +
                          std::to_string(clock.offset_bound_ppm) + " ppm");
      }
    }
  }
  if (!clock.initial_phases.empty()) {
    if (clock.initial_phases.size() != n) {
      throw ConfigError("clock.initial_phases needs one value per node");
    }
    for (double p : clock.initial_phases) {
      if (!(p >= 0.0)) throw ConfigError("initial phases must be >= 0");
    }
  }
  if (buffers.depth < 1) throw ConfigError("buffers.depth must be >= 1");
  if (buffers.eb_init < 0 || buffers.eb_init > buffers.depth) {
    throw ConfigError("buffers.eb_init must lie in [0, depth]");
  }
  if (buffers.counter_bits < 2 || buffers.counter_bits > 64) {
    throw ConfigError("buffers.counter_bits must lie in [2, 64]");
  }
  // Counters are sampled once per controller period; extension needs the
  // per-sample advance to stay below half the counter range.
  const double max_advance = static_cast<double>(controller.period_ticks) * 1.001 + 2.0;
  if (buffers.counter_bits < 64 &&
      std::ldexp(1.0, static_cast<int>(buffers.counter_bits) - 1) <= max_advance) {
    throw ConfigError("buffers.counter_bits = " + std::to_string(buffers.counter_bits) +
                      " is too narrow for a controller period of " +
                      std::to_string(controller.period_ticks) + " ticks");
  }
  if (pipeline_frames < 0.0 || pipeline_jitter_frames < 0.0) {
    throw ConfigError("pipeline delays must be >= 0");
  }
  if (pipeline_jitter_frames > pipeline_frames) {
    throw ConfigError("link.pipeline_jitter_frames must not exceed link.pipeline_frames");
  }
  if (mode == BufferMode::ddc_then_reframe && !reframe_at_s) {
    throw ConfigError("mode ddc_then_reframe needs reframe.at_seconds");
  }
  if (reframe_at_s && mode != BufferMode::ddc_then_reframe) {
    throw ConfigError("reframe.at_seconds is only valid with mode ddc_then_reframe");
  }
  if (reframe_at_s && !(*reframe_at_s >= 0.0)) throw ConfigError("reframe.at_seconds must be >= 0");
  if (!(divergence_ppm > 0.0)) throw ConfigError("engine.divergence_ppm must be positive");
}

double SimConfig::effective_latency(std::size_t index) const {
  return topology.link(index).latency_s + pipeline_frames / clock.nominal_hz;
}

std::int64_t buffer_occupancy_model(const PhaseHistory& sender, const PhaseHistory& receiver,
                                    double latency_s, std::int64_t lambda, double t) {
  return sender.floor_phase_at(t - latency_s) - receiver.floor_phase_at(t) + lambda;
}

namespace detail {
namespace {

// Closed-form occupancies; DDC links additionally reconstruct the reading
// through narrow Gray-coded counters and check it against the model.
class ModelNetwork final : public Network {
 public:
  explicit ModelNetwork(SimConfig config) : Network(std::move(config)) {
    const unsigned bits = config_.buffers.counter_bits;
    ddc_.resize(links_.size(), DdcTracker{{bits, 0}, {bits, 0}});
  }

 protected:
  std::int64_t measure_link(std::size_t k, double t, std::int64_t receiver_floor) override {
    const LinkState& link = links_[k];
    const std::int64_t sender_floor = nodes_[link.src].history.floor_phase_at(t - link.latency);
    const std::int64_t beta = sender_floor - receiver_floor + link.lambda;
    if (link.elastic) {
      check_occupancy(beta, config_.buffers.depth, t);
      return beta;
    }
    DdcTracker& ddc = ddc_[k];
    const unsigned bits = config_.buffers.counter_bits;
    const WrappingCounter rx(bits, static_cast<std::uint64_t>(sender_floor - link.sender_floor0));
    const WrappingCounter tx(bits, static_cast<std::uint64_t>(receiver_floor - link.receiver_floor0));
    ddc.rx = extend(ddc.rx, gray_decode(sample_gray(rx, false, rng_)), t);
    ddc.tx = extend(ddc.tx, gray_decode(sample_gray(tx, false, rng_)), t);
    const std::int64_t value = ddc_occupancy(ddc.rx, ddc.tx).value;
    if (value != beta) {
      throw SimulationFault(FaultKind::accounting, t,
                            "DDC reading " + std::to_string(value) + " disagrees with model " +
                                std::to_string(beta) + " on link " + std::to_string(link.src) +
                                "->" + std::to_string(link.dst));
    }
    return value;
  }

  std::int64_t observe_link(std::size_t k, double t) override {
    return model_occupancy(k, t, nodes_[links_[k].dst].history.floor_phase_at(t));
  }

  std::int64_t reframe_link(std::size_t k, double t) override {
    const std::int64_t ddc = observe_link(k, t);
    return reframe(DdcOccupancy{static_cast<std::int32_t>(ddc)}, config_.buffers.eb_init,
                   config_.buffers.depth)
        .lambda_delta;
  }

 private:
  struct DdcTracker {
    ExtendedCounter rx;
    ExtendedCounter tx;
  };
  std::vector<DdcTracker> ddc_;
  std::mt19937_64 rng_{0};
};

}  // namespace
}  // namespace detail

Telemetry run_engine(const SimConfig& config, EngineKind kind) {
  if (kind == EngineKind::model) return detail::ModelNetwork(config).run();
  return detail::run_frame_oracle(config);
}

namespace {

Telemetry throw_on_fault(Telemetry t) {
  if (t.fault) throw SimulationFault(t.fault->kind, t.fault->time_s, t.fault->message);
  return t;
}

}  // namespace

Telemetry simulate(const SimConfig& config) { return throw_on_fault(run_engine(config, EngineKind::model)); }

Telemetry discrete_oracle(const SimConfig& config) {
  return throw_on_fault(run_engine(config, EngineKind::frames));
}

std::int64_t rtt_logical_latency(const Telemetry& telemetry, NodeId i, NodeId j) {
  const LinkRecord* out = nullptr;
  const LinkRecord* in = nullptr;
  for (const auto& l : telemetry.links) {
    if (l.src == i && l.dst == j) out = &l;
    if (l.src == j && l.dst == i) in = &l;
  }
  if (!out || !in) {
    throw QueryError("no round trip between nodes " + std::to_string(i) + " and " +
                     std::to_string(j));
  }
  return out->lambda + in->lambda;
}

std::int64_t in_flight_estimate(std::int64_t rtt, std::int64_t eb_frames_per_side,
                                std::int64_t flight_frames) {
  const std::int64_t pipeline = rtt - 2 * eb_frames_per_side - flight_frames;
  if (pipeline < 0) {
    throw ModelInconsistency("round trip of " + std::to_string(rtt) + " frames cannot hold " +
                             std::to_string(2 * eb_frames_per_side) + " buffered and " +
                             std::to_string(flight_frames) + " in-flight frames");
  }
  return pipeline;
}

}  // namespace bittide
