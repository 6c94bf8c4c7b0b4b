#pragma once

#include <cstdint>
#include <span>

namespace bittide {

/// Proportional controller parameters.
///
/// The correction demanded by a node is
///   c_rel [ppm] = gain_scale * kp * sum_j (beta_j - beta_off)
/// so `gain_scale` is in ppm per frame of occupancy error per unit gain.
/// The default 1e-3 ppm (1e-9 relative) maps kp = 0.25 to 2.5e-10 and
/// kp = 25 to 2.5e-8 relative units per frame.
struct ControllerParams {
  double kp = 0.25;
  double gain_scale = 1e-3;
  double beta_off = 0.0;
  std::int64_t period_ticks = 125;
  std::int64_t delay_ticks = 0;

  /// Throws ConfigError when an invariant is violated.
  void check() const;
};

struct ControllerState {
  double c_est_ppm = 0.0;
  double last_c_rel_ppm = 0.0;
  std::int64_t net_steps = 0;
};

double relative_correction(std::span<const std::int64_t> occupancies, const ControllerParams& params);

/// Sign of (c_rel - c_est); exact ties give 0.
int decide(double c_rel_ppm, const ControllerState& state);

/// Accounts one applied pulse. c_est stays an exact multiple of the step:
/// c_est = step_ppm * net_steps.
ControllerState commit(ControllerState state, int direction, double step_ppm);

}  // namespace bittide
