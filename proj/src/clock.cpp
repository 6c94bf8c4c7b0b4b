#include "bittide/clock.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bittide/error.hpp"

namespace bittide {

Actuator::Actuator(double step_ppm, double min_pulse_interval_s)
    : step_ppm_(step_ppm), min_pulse_interval_s_(min_pulse_interval_s) {
  if (!(step_ppm > 0.0)) throw ConfigError("actuator step size must be positive");
  if (min_pulse_interval_s < 0.0) throw ConfigError("minimum pulse interval must be >= 0");
}

bool Actuator::can_pulse(double t) const noexcept {
  return !last_pulse_s_ || t - *last_pulse_s_ >= min_pulse_interval_s_ - kPulseTimeSlack;
}

void Actuator::apply_pulse(int direction, double t) {
  if (direction == 0) return;
  if (direction != 1 && direction != -1) {
    throw std::invalid_argument("pulse direction must be -1, 0 or +1");
  }
  if (!can_pulse(t)) {
    throw PulseTooSoon("pulse at t=" + std::to_string(t) + " s is within " +
                       std::to_string(min_pulse_interval_s_) + " s of the previous pulse");
  }
  net_steps_ += direction;
  last_pulse_s_ = t;
}

double effective_offset_ppm(const Oscillator& osc, const Actuator& act) {
  return combine_ppm(osc.offset_ppm, act.step_ppm() * static_cast<double>(act.net_steps()));
}

double effective_frequency(const Oscillator& osc, const Actuator& act) {
  return osc.nominal_hz * (1.0 + osc.offset_ppm * 1e-6) *
         (1.0 + act.step_ppm() * 1e-6 * static_cast<double>(act.net_steps()));
}

Phase Phase::from_real(double x) {
  const double w = std::floor(x);
  return Phase{static_cast<std::int64_t>(w), x - w};
}

namespace {

// Phase reached after advancing `base` by `delta` localticks.
Phase advance(Phase base, double delta) {
  const double x = base.frac + delta;
  const double w = std::floor(x);
  return Phase{base.whole + static_cast<std::int64_t>(w), x - w};
}

}  // namespace

PhaseHistory::PhaseHistory(double anchor_time, Phase anchor_phase, double frequency,
                           double begin_time)
    : begin_time_(begin_time) {
  if (!(frequency > 0.0)) throw ConfigError("clock frequency must be positive");
  if (begin_time > anchor_time) throw ConfigError("history must begin at or before its anchor");
  segments_.push_back({anchor_time, anchor_phase, frequency});
}

void PhaseHistory::set_frequency(double t, double frequency) {
  const Segment& last = segments_.back();
  if (t < last.start_time) {
    throw QueryError("frequency change at t=" + std::to_string(t) +
                     " precedes the current segment");
  }
  if (!(frequency > 0.0)) throw ConfigError("clock frequency must be positive");
  const Phase p = advance(last.start_phase, last.frequency * (t - last.start_time));
  if (t == last.start_time && segments_.size() > 1) {
    segments_.back().frequency = frequency;
    return;
  }
  segments_.push_back({t, p, frequency});
}

const PhaseHistory::Segment& PhaseHistory::segment_for_time(double t) const {
  if (t < begin_time_) {
    throw QueryError("phase query at t=" + std::to_string(t) + " precedes history start " +
                     std::to_string(begin_time_));
  }
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    if (it->start_time <= t) return *it;
  }
  return segments_.front();
}

const PhaseHistory::Segment& PhaseHistory::segment_for_phase(Phase target) const {
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    if (it->start_phase <= target) return *it;
  }
  return segments_.front();
}

Phase PhaseHistory::split_phase_at(double t) const {
  const Segment& s = segment_for_time(t);
  return advance(s.start_phase, s.frequency * (t - s.start_time));
}

double PhaseHistory::phase_at(double t) const { return split_phase_at(t).value(); }

std::int64_t PhaseHistory::floor_phase_at(double t) const {
  const Segment& s = segment_for_time(t);
  return s.start_phase.whole +
         static_cast<std::int64_t>(std::floor(s.start_phase.frac + s.frequency * (t - s.start_time)));
}

double PhaseHistory::time_of_phase(Phase target) const {
  const Segment& s = segment_for_phase(target);
  const double ticks = static_cast<double>(target.whole - s.start_phase.whole) +
                       (target.frac - s.start_phase.frac);
  const double t = s.start_time + ticks / s.frequency;
  if (t < begin_time_) {
    throw QueryError("phase " + std::to_string(target.value()) + " precedes history start");
  }
  return t;
}

void PhaseHistory::prune_before(double t) {
  while (segments_.size() > 1 && segments_[1].start_time <= t) segments_.pop_front();
  if (t > begin_time_) begin_time_ = t;
}

}  // namespace bittide
