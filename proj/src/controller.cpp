#include "bittide/controller.hpp"

#include <stdexcept>

#include "bittide/error.hpp"

namespace bittide {

void ControllerParams::check() const {
  if (!(kp > 0.0)) throw ConfigError("controller.kp must be positive");
  if (!(gain_scale > 0.0)) throw ConfigError("controller.gain_scale must be positive");
  if (period_ticks < 1) throw ConfigError("controller.period_ticks must be >= 1");
  if (delay_ticks < 0) throw ConfigError("controller.delay_ticks must be >= 0");
}

double relative_correction(std::span<const std::int64_t> occupancies, const ControllerParams& params) {
  double sum = 0.0;
  for (std::int64_t beta : occupancies) sum += static_cast<double>(beta) - params.beta_off;
  return params.gain_scale * params.kp * sum;
}

int decide(double c_rel_ppm, const ControllerState& state) {
  if (c_rel_ppm < state.c_est_ppm) return -1;
  if (c_rel_ppm > state.c_est_ppm) return 1;
  return 0;
}

ControllerState commit(ControllerState state, int direction, double step_ppm) {
  if (direction < -1 || direction > 1) {
    throw std::invalid_argument("pulse direction must be -1, 0 or +1");
  }
  state.net_steps += direction;
  state.c_est_ppm = step_ppm * static_cast<double>(state.net_steps);
  return state;
}

}  // namespace bittide
