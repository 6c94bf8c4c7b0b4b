#pragma once

#include <cstdint>
#include <deque>
#include <optional>

namespace bittide {

/// Free-running oscillator: nominal frequency and static offset in ppm.
struct Oscillator {
  double nominal_hz = 125e6;
  double offset_ppm = 0.0;
};

/// Pulses this much closer than the minimum interval still count as spaced
/// by it, so timestamps like t + 1e-6 survive rounding.
inline constexpr double kPulseTimeSlack = 1e-12;

/// FINC/FDEC pulse interface of an adjustable clock source.
class Actuator {
 public:
  Actuator() = default;
  Actuator(double step_ppm, double min_pulse_interval_s);

  double step_ppm() const noexcept { return step_ppm_; }
  double min_pulse_interval() const noexcept { return min_pulse_interval_s_; }
  std::int64_t net_steps() const noexcept { return net_steps_; }
  std::optional<double> last_pulse_time() const noexcept { return last_pulse_s_; }

  /// True if a nonzero pulse at `t` respects the minimum interval.
  bool can_pulse(double t) const noexcept;

  /// Applies one pulse in `direction` (-1, 0, +1). Direction 0 is a no-op.
  /// Throws PulseTooSoon if `t` is closer than the minimum interval to the
  /// previous pulse, std::invalid_argument for any other direction.
  void apply_pulse(int direction, double t);

 private:
  double step_ppm_ = 0.01;
  double min_pulse_interval_s_ = 1e-6;
  std::int64_t net_steps_ = 0;
  std::optional<double> last_pulse_s_;
};

/// Total frequency offset from nominal, in ppm, for a static offset `a` and
/// an applied correction `b` (both ppm): (1+a)(1+b) - 1 expanded so small
/// offsets keep full precision.
constexpr double combine_ppm(double a_ppm, double b_ppm) noexcept {
  return a_ppm + b_ppm + a_ppm * b_ppm * 1e-6;
}

/// nominal * (1 + offset) * (1 + step * net_steps)
double effective_frequency(const Oscillator& osc, const Actuator& act);
double effective_offset_ppm(const Oscillator& osc, const Actuator& act);

/// Clock phase in localticks, split into an integer part and a fraction in
/// [0, 1) so floors stay exact for large tick counts.
struct Phase {
  std::int64_t whole = 0;
  double frac = 0.0;

  static Phase from_real(double x);
  double value() const noexcept { return static_cast<double>(whole) + frac; }

  friend auto operator<=>(const Phase&, const Phase&) = default;
};

/// Piecewise-linear phase trajectory theta(t) for a clock whose frequency is
/// constant between actuation instants. Evaluation is closed form.
///
/// The first segment also extends backwards to `begin_time`, which lets the
/// engine read delayed phases theta(t - l) for t < l.
class PhaseHistory {
 public:
  struct Segment {
    double start_time = 0.0;
    Phase start_phase;
    double frequency = 0.0;
  };

  PhaseHistory() = default;
  PhaseHistory(double anchor_time, Phase anchor_phase, double frequency,
               double begin_time);

  double begin_time() const noexcept { return begin_time_; }
  double current_frequency() const { return segments_.back().frequency; }
  const std::deque<Segment>& segments() const noexcept { return segments_; }

  /// Starts a new segment at `t` with the given frequency; the phase is
  /// continuous across the boundary. `t` must not precede the last segment.
  void set_frequency(double t, double frequency);

  double phase_at(double t) const;
  Phase split_phase_at(double t) const;
  std::int64_t floor_phase_at(double t) const;

  /// Inverse of phase_at. The last segment is open ended, so any phase at or
  /// after the history start is reachable.
  double time_of_phase(Phase target) const;
  double time_of_localtick(double k) const { return time_of_phase(Phase::from_real(k)); }

  /// Drops segments that end at or before `t`. Queries at times >= t are
  /// unaffected.
  void prune_before(double t);

 private:
  const Segment& segment_for_time(double t) const;
  const Segment& segment_for_phase(Phase target) const;

  std::deque<Segment> segments_;
  double begin_time_ = 0.0;
};

}  // namespace bittide
