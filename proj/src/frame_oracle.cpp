#include "frame_oracle.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <optional>

#include "bittide/buffers.hpp"
#include "network.hpp"

namespace bittide::detail {

namespace {

constexpr std::size_t kMaxNodes = 8;
constexpr double kMaxDuration = 0.05;

// Marks frames inserted by reframing; they carry no send tick.
constexpr std::int64_t kFiller = std::numeric_limits<std::int64_t>::min();

struct InFlight {
  std::int64_t send_tick;
  double arrival;
};

struct FrameLink {
  std::deque<InFlight> in_flight;
  std::deque<std::int64_t> fifo;   // send ticks, head first
  std::deque<std::int64_t> owed;   // receive ticks of pops from an empty virtual buffer
  std::optional<ElasticBuffer> eb;
  std::vector<LambdaRun> ledger;
  bool arrival_scheduled = false;

  std::int64_t occupancy() const {
    if (eb) return eb->occupancy();
    return static_cast<std::int64_t>(fifo.size()) - static_cast<std::int64_t>(owed.size());
  }

  void record(std::int64_t send_tick, std::int64_t recv_tick) {
    const std::int64_t lambda = recv_tick - send_tick;
    if (ledger.empty() || ledger.back().lambda != lambda) {
      ledger.push_back({lambda, send_tick, 0});
    }
    ++ledger.back().frames;
  }
};

// Every frame is an individual object: sent once per sender localtick on
// each outgoing link, delivered after the link latency, queued, and popped
// once per receiver localtick.
class FrameNetwork final : public Network {
 public:
  explicit FrameNetwork(SimConfig config) : Network(std::move(config)) {
    frames_.resize(links_.size());
    next_tick_.resize(nodes_.size());
    tick_version_.resize(nodes_.size(), 0);
  }

 protected:
  void start() override {
    for (NodeId i = 0; i < nodes_.size(); ++i) {
      next_tick_[i] = nodes_[i].history.floor_phase_at(0.0) + 1;
      schedule_tick(i);
    }
    for (std::size_t k = 0; k < links_.size(); ++k) {
      const LinkState& link = links_[k];
      FrameLink& fl = frames_[k];
      const PhaseHistory& sender = nodes_[link.src].history;
      // Frames sent in (-l, 0] are still on the wire at the start.
      const std::int64_t sent_by_start = sender.floor_phase_at(0.0);
      for (std::int64_t tick = link.sender_floor0 + 1; tick <= sent_by_start; ++tick) {
        fl.in_flight.push_back({tick, sender.time_of_phase(Phase{tick, 0.0}) + link.latency});
      }
      if (link.elastic) {
        const std::int64_t init = config_.buffers.eb_init;
        for (std::int64_t tick = link.sender_floor0 - init + 1; tick <= link.sender_floor0; ++tick) {
          fl.fifo.push_back(tick);
        }
        fl.eb.emplace(config_.buffers.depth, init);
      }
      schedule_arrival(k);
    }
  }

  void handle(const Event& ev) override {
    if (ev.kind == EventKind::arrival) {
      arrive(ev.index, ev.time);
    } else if (ev.kind == EventKind::tick && ev.version == tick_version_[ev.index]) {
      tick(ev.index, ev.time);
    }
  }

  std::int64_t measure_link(std::size_t k, double t, std::int64_t) override {
    const std::int64_t occ = frames_[k].occupancy();
    if (links_[k].elastic) check_occupancy(occ, config_.buffers.depth, t);
    return occ;
  }

  std::int64_t observe_link(std::size_t k, double) override { return frames_[k].occupancy(); }

  std::int64_t reframe_link(std::size_t k, double) override {
    FrameLink& fl = frames_[k];
    const std::int64_t held = fl.occupancy();
    const std::int64_t init = config_.buffers.eb_init;
    ReframeResult result =
        reframe(DdcOccupancy{static_cast<std::int32_t>(held)}, init, config_.buffers.depth);
    if (held >= init) {
      fl.fifo.erase(fl.fifo.begin(), fl.fifo.begin() + (held - init));
    } else {
      fl.owed.clear();
      const std::int64_t missing = init - static_cast<std::int64_t>(fl.fifo.size());
      fl.fifo.insert(fl.fifo.begin(), static_cast<std::size_t>(missing), kFiller);
    }
    fl.eb = result.buffer;
    return result.lambda_delta;
  }

  void frequency_changed(NodeId node, double) override { schedule_tick(node); }

  void finish(Telemetry& telemetry) override {
    for (std::size_t k = 0; k < frames_.size(); ++k) telemetry.links[k].ledger = frames_[k].ledger;
  }

 private:
  void schedule_tick(NodeId i) {
    const double t = nodes_[i].history.time_of_phase(Phase{next_tick_[i], 0.0});
    schedule(t, EventKind::tick, i, ++tick_version_[i]);
  }

  void schedule_arrival(std::size_t k) {
    FrameLink& fl = frames_[k];
    if (fl.arrival_scheduled || fl.in_flight.empty()) return;
    schedule(fl.in_flight.front().arrival, EventKind::arrival, k);
    fl.arrival_scheduled = true;
  }

  void arrive(std::size_t k, double t) {
    FrameLink& fl = frames_[k];
    fl.arrival_scheduled = false;
    const std::int64_t send_tick = fl.in_flight.front().send_tick;
    fl.in_flight.pop_front();
    if (fl.eb) {
      fl.eb->push(t);
      fl.fifo.push_back(send_tick);
    } else if (!fl.owed.empty()) {
      fl.record(send_tick, fl.owed.front());
      fl.owed.pop_front();
      ++telemetry_.counts.frames_received;
    } else {
      fl.fifo.push_back(send_tick);
    }
    schedule_arrival(k);
  }

  void tick(NodeId i, double t) {
    const std::int64_t m = next_tick_[i];
    for (std::size_t k : config_.topology.incoming(i)) pop(k, m, t);
    for (std::size_t k : config_.topology.outgoing(i)) {
      frames_[k].in_flight.push_back({m, t + links_[k].latency});
      schedule_arrival(k);
    }
    telemetry_.counts.frames_sent += config_.topology.outgoing(i).size();
    ++next_tick_[i];
    schedule_tick(i);
  }

  void pop(std::size_t k, std::int64_t recv_tick, double t) {
    FrameLink& fl = frames_[k];
    if (fl.eb) {
      fl.eb->pop(t);
    } else if (fl.fifo.empty()) {
      fl.owed.push_back(recv_tick);
      return;
    }
    const std::int64_t send_tick = fl.fifo.front();
    fl.fifo.pop_front();
    if (send_tick != kFiller) {
      fl.record(send_tick, recv_tick);
      ++telemetry_.counts.frames_received;
    }
  }

  std::vector<FrameLink> frames_;
  std::vector<std::int64_t> next_tick_;
  std::vector<std::uint64_t> tick_version_;
};

}  // namespace

Telemetry run_frame_oracle(const SimConfig& config) {
  if (config.topology.size() > kMaxNodes) {
    throw ConfigError("frame oracle is limited to " + std::to_string(kMaxNodes) + " nodes");
  }
  if (config.duration_s > kMaxDuration) {
    throw ConfigError("frame oracle is limited to 50 ms of simulated time");
  }
  return FrameNetwork(config).run();
}

}  // namespace bittide::detail
