#pragma once

// Control loop shared by the closed-form engine and the frame oracle. The
// two differ only in how a link's occupancy is obtained; clocks, controllers,
// actuation, telemetry and reframing live here.

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include "bittide/buffers.hpp"
#include "bittide/clock.hpp"
#include "bittide/controller.hpp"
#include "bittide/engine.hpp"

namespace bittide::detail {

/// Uniform draw in [lo, hi) from the top 53 bits of one generator output.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

class Network {
 public:
  explicit Network(SimConfig config);
  virtual ~Network() = default;

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  /// Runs to the configured duration. Faults end the run early and are
  /// recorded in the returned telemetry.
  Telemetry run();

 protected:
  // Lower values run first among events at the same instant: frames arrive
  // before a node ticks, and a controller measures after both.
  enum class EventKind : std::uint8_t { arrival = 0, tick = 1, reframe = 2, control = 3, sample = 4 };

  struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    std::uint32_t index;
    std::uint64_t version;
  };

  struct NodeState {
    Oscillator osc;
    Actuator act;
    PhaseHistory history;
    ControllerState control;
    Phase theta0;
    std::int64_t next_measure = 0;                        ///< whole part of the next measurement phase
    std::deque<std::pair<std::int64_t, int>> pending;     ///< (phase whole, direction) actuations
    std::uint64_t control_version = 0;
    double history_horizon = 0.0;
    double min_gap = 0.0;
  };

  struct LinkState {
    NodeId src = 0;
    NodeId dst = 0;
    double latency = 0.0;
    std::int64_t lambda = 0;
    std::int64_t lambda_initial = 0;
    std::int64_t control_shift = 0;
    std::int64_t sender_floor0 = 0;    ///< floor(theta_src(-l))
    std::int64_t receiver_floor0 = 0;  ///< floor(theta_dst(0))
    bool elastic = false;
  };

  void schedule(double t, EventKind kind, std::size_t index, std::uint64_t version = 0);

  virtual void start() {}
  virtual void handle(const Event&) {}
  /// Occupancy seen by the controller of the link's receiver.
  virtual std::int64_t measure_link(std::size_t link, double t, std::int64_t receiver_floor) = 0;
  /// Occupancy reported to telemetry; must not change accounting state.
  virtual std::int64_t observe_link(std::size_t link, double t) = 0;
  /// Switches the link to a real elastic buffer; returns the latency change.
  virtual std::int64_t reframe_link(std::size_t link, double t) = 0;
  virtual void frequency_changed(NodeId, double) {}
  virtual void finish(Telemetry&) {}

  std::int64_t model_occupancy(std::size_t link, double t, std::int64_t receiver_floor) const;

  SimConfig config_;
  std::vector<NodeState> nodes_;
  std::vector<LinkState> links_;
  Telemetry telemetry_;

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.time != b.time) return a.time > b.time;
      if (a.kind != b.kind) return a.kind > b.kind;
      return a.seq > b.seq;
    }
  };

  void handle_control(NodeId node, double t);
  int measure(NodeId node, double t);
  void actuate(NodeId node, double t, int direction);
  void schedule_control(NodeId node);
  void sample(double t);
  void reframe_all(double t);

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::size_t sample_count_ = 0;
  std::size_t next_sample_ = 0;
  std::vector<std::int64_t> scratch_;
};

}  // namespace bittide::detail
