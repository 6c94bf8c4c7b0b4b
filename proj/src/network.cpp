#include "network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bittide::detail {

namespace {

constexpr std::size_t kPruneThreshold = 64;

}  // namespace

Network::Network(SimConfig config) : config_(std::move(config)) {
  config_.check();
  const Topology& topo = config_.topology;
  const std::size_t n = topo.size();
  std::mt19937_64 rng(config_.seed);

  std::vector<double> offsets = config_.clock.offsets_ppm;
  if (offsets.empty()) {
    const double b = config_.clock.offset_bound_ppm;
    for (std::size_t i = 0; i < n; ++i) offsets.push_back(uniform(rng, -b, b));
  }
  std::vector<double> phases = config_.clock.initial_phases;
  if (phases.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      const double whole = std::floor(uniform(rng, 0.0, static_cast<double>(config_.clock.phase_spread)));
      phases.push_back(whole + uniform(rng, 0.0, 1.0));
    }
  }

  links_.resize(topo.links().size());
  double max_latency = 0.0;
  for (std::size_t k = 0; k < links_.size(); ++k) {
    const Link& l = topo.link(k);
    double latency = config_.effective_latency(k);
    if (config_.pipeline_jitter_frames > 0.0) {
      const double j = config_.pipeline_jitter_frames;
      latency += uniform(rng, -j, j) / config_.clock.nominal_hz;
    }
    links_[k].src = l.src;
    links_[k].dst = l.dst;
    links_[k].latency = latency;
    links_[k].elastic = config_.mode == BufferMode::elastic;
    max_latency = std::max(max_latency, latency);
  }

  const double begin = -max_latency - 1e-9;
  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    NodeState& node = nodes_[i];
    node.osc = Oscillator{config_.clock.nominal_hz, offsets[i]};
    node.act = Actuator(config_.clock.step_ppm, config_.clock.min_pulse_interval_s);
    node.theta0 = Phase::from_real(phases[i]);
    node.history = PhaseHistory(0.0, node.theta0, effective_frequency(node.osc, node.act), begin);
    node.next_measure = node.theta0.whole;
    node.min_gap = std::numeric_limits<double>::infinity();
  }
  for (auto& link : links_) {
    nodes_[link.src].history_horizon = std::max(nodes_[link.src].history_horizon, link.latency);
    link.sender_floor0 = nodes_[link.src].history.floor_phase_at(-link.latency);
    link.receiver_floor0 = nodes_[link.dst].history.floor_phase_at(0.0);
    link.lambda = link.receiver_floor0 - link.sender_floor0;
    if (link.elastic) link.lambda += config_.buffers.eb_init;
    link.lambda_initial = link.lambda;
  }

  telemetry_.n_nodes = n;
  telemetry_.duration_s = config_.duration_s;
  telemetry_.cadence_s = config_.cadence_s;
  telemetry_.step_ppm = config_.clock.step_ppm;
  telemetry_.initial_offset_ppm = offsets;
  sample_count_ = static_cast<std::size_t>(std::ceil(config_.duration_s / config_.cadence_s - 1e-9));
}

void Network::schedule(double t, EventKind kind, std::size_t index, std::uint64_t version) {
  queue_.push(Event{t, kind, seq_++, static_cast<std::uint32_t>(index), version});
}

std::int64_t Network::model_occupancy(std::size_t link, double t, std::int64_t receiver_floor) const {
  const LinkState& l = links_[link];
  return nodes_[l.src].history.floor_phase_at(t - l.latency) - receiver_floor + l.lambda;
}

Telemetry Network::run() {
  try {
    start();
    schedule(0.0, EventKind::sample, 0);
    if (config_.reframe_at_s && *config_.reframe_at_s < config_.duration_s) {
      schedule(*config_.reframe_at_s, EventKind::reframe, 0);
    }
    for (NodeId i = 0; i < nodes_.size(); ++i) schedule_control(i);

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.time >= config_.duration_s) break;
      queue_.pop();
      ++telemetry_.counts.events;
      switch (ev.kind) {
        case EventKind::control:
          if (ev.version == nodes_[ev.index].control_version) handle_control(ev.index, ev.time);
          break;
        case EventKind::sample:
          sample(ev.time);
          break;
        case EventKind::reframe:
          reframe_all(ev.time);
          break;
        default:
          handle(ev);
          break;
      }
    }
  } catch (const SimulationFault& fault) {
    telemetry_.fault = FaultRecord{fault.kind(), fault.time(), fault.what()};
  }

  telemetry_.links.clear();
  for (const auto& l : links_) {
    LinkRecord rec;
    rec.src = l.src;
    rec.dst = l.dst;
    rec.latency_s = l.latency;
    rec.lambda_initial = l.lambda_initial;
    rec.lambda = l.lambda;
    rec.reframe_delta = l.lambda - l.lambda_initial;
    telemetry_.links.push_back(std::move(rec));
  }
  telemetry_.min_pulse_gap_s.clear();
  for (const auto& node : nodes_) telemetry_.min_pulse_gap_s.push_back(node.min_gap);
  finish(telemetry_);
  return std::move(telemetry_);
}

void Network::schedule_control(NodeId i) {
  NodeState& node = nodes_[i];
  std::int64_t target = node.next_measure;
  if (!node.pending.empty()) target = std::min(target, node.pending.front().first);
  const double t = node.history.time_of_phase(Phase{target, node.theta0.frac});
  schedule(t, EventKind::control, i, ++node.control_version);
}

void Network::handle_control(NodeId i, double t) {
  NodeState& node = nodes_[i];
  if (!node.pending.empty() && node.pending.front().first <= node.next_measure) {
    const int direction = node.pending.front().second;
    node.pending.pop_front();
    actuate(i, t, direction);
  } else {
    const int direction = measure(i, t);
    if (config_.controller.delay_ticks == 0) {
      actuate(i, t, direction);
    } else if (direction != 0) {
      node.pending.emplace_back(node.next_measure + config_.controller.delay_ticks, direction);
    }
    node.next_measure += config_.controller.period_ticks;
  }
  schedule_control(i);
}

int Network::measure(NodeId i, double t) {
  NodeState& node = nodes_[i];
  const auto& incoming = config_.topology.incoming(i);
  scratch_.clear();
  for (std::size_t k : incoming) {
    const std::int64_t occ = measure_link(k, t, node.next_measure);
    if (config_.record_measurements) telemetry_.measurements.push_back({t, k, occ});
    scratch_.push_back(occ - links_[k].control_shift);
  }
  ++telemetry_.counts.measurements;
  const double c_rel = scratch_.empty() ? 0.0 : relative_correction(scratch_, config_.controller);
  node.control.last_c_rel_ppm = c_rel;
  return decide(c_rel, node.control);
}

void Network::actuate(NodeId i, double t, int direction) {
  if (direction == 0) return;
  NodeState& node = nodes_[i];
  if (!node.act.can_pulse(t)) {
    ++telemetry_.counts.suppressed_pulses;
    return;
  }
  if (const auto last = node.act.last_pulse_time()) node.min_gap = std::min(node.min_gap, t - *last);
  node.act.apply_pulse(direction, t);
  node.control = commit(node.control, direction, config_.clock.step_ppm);
  ++telemetry_.counts.pulses;
  if (config_.record_pulses) telemetry_.pulses.push_back({t, i, direction});

  const double ppm = effective_offset_ppm(node.osc, node.act);
  if (std::abs(ppm) > config_.divergence_ppm) {
    throw SimulationFault(FaultKind::divergence, t,
                          "node " + std::to_string(i) + " frequency offset " + std::to_string(ppm) +
                              " ppm exceeds the divergence guard of " +
                              std::to_string(config_.divergence_ppm) + " ppm");
  }
  node.history.set_frequency(t, effective_frequency(node.osc, node.act));
  if (node.history.segments().size() > kPruneThreshold) {
    node.history.prune_before(t - node.history_horizon - 1e-9);
  }
  frequency_changed(i, t);
}

void Network::sample(double t) {
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    const NodeState& node = nodes_[i];
    telemetry_.frequency.push_back({t, i, effective_offset_ppm(node.osc, node.act),
                                    node.control.c_est_ppm, node.act.net_steps()});
  }
  for (std::size_t k = 0; k < links_.size(); ++k) {
    telemetry_.occupancy.push_back(
        {t, links_[k].dst, links_[k].src, observe_link(k, t), links_[k].elastic});
  }
  if (++next_sample_ < sample_count_) {
    schedule(static_cast<double>(next_sample_) * config_.cadence_s, EventKind::sample, 0);
  }
}

void Network::reframe_all(double t) {
  for (std::size_t k = 0; k < links_.size(); ++k) {
    if (links_[k].elastic) continue;
    const std::int64_t delta = reframe_link(k, t);
    links_[k].lambda += delta;
    links_[k].control_shift += delta;
    links_[k].elastic = true;
  }
  telemetry_.reframe_time_s = t;
}

}  // namespace bittide::detail
