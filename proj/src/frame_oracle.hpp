#pragma once

#include "bittide/engine.hpp"

namespace bittide::detail {

Telemetry run_frame_oracle(const SimConfig& config);

}  // namespace bittide::detail
