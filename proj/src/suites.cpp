#include <map>

#include "bittide/experiment.hpp"

namespace bittide {

namespace {

struct Suite {
  const char* desk;
  const char* full;
};

const std::map<std::string, Suite>& suites() {
  static const std::map<std::string, Suite> table = {
      {"fully_connected",
       {R"(name = fully_connected
topology.kind = complete
topology.n = 8
sim.mode = ddc
sim.duration_s = 13
sim.seed = 8
clock.step_ppm = 0.01
controller.kp = 0.25
)",
        R"(name = fully_connected
topology.kind = complete
topology.n = 8
sim.mode = ddc_then_reframe
sim.duration_s = 40
sim.seed = 8
reframe.at_seconds = 30
clock.step_ppm = 0.01
controller.kp = 0.25
)"}},
      {"realistic",
       {R"(name = realistic
topology.kind = complete
topology.n = 8
sim.mode = ddc
sim.duration_s = 1
sim.seed = 8
telemetry.cadence_s = 0.02
clock.step_ppm = 0.1
controller.kp = 25
)",
        R"(name = realistic
topology.kind = complete
topology.n = 8
sim.mode = ddc
sim.duration_s = 5
sim.seed = 8
telemetry.cadence_s = 0.02
clock.step_ppm = 0.1
controller.kp = 25
)"}},
      {"hourglass",
       {R"(name = hourglass
topology.kind = hourglass
sim.mode = ddc
sim.duration_s = 5
sim.seed = 4
telemetry.cadence_s = 0.02
clock.step_ppm = 0.1
controller.kp = 25
stats.partition = 0,1,2,3;4,5,6,7
)",
        R"(name = hourglass
topology.kind = hourglass
sim.mode = ddc
sim.duration_s = 60
sim.seed = 4
clock.step_ppm = 0.01
controller.kp = 0.25
stats.partition = 0,1,2,3;4,5,6,7
)"}},
      {"cube",
       {R"(name = cube
topology.kind = cube
sim.mode = ddc
sim.duration_s = 3
sim.seed = 3
telemetry.cadence_s = 0.02
clock.step_ppm = 0.1
controller.kp = 25
)",
        R"(name = cube
topology.kind = cube
sim.mode = ddc
sim.duration_s = 60
sim.seed = 3
clock.step_ppm = 0.01
controller.kp = 0.25
)"}},
      {"long_link",
       {R"(name = long_link
topology.kind = complete
topology.n = 8
fiber = 0, 2, 2000
sim.mode = ddc_then_reframe
sim.duration_s = 1
sim.seed = 2
reframe.at_seconds = 0.6
telemetry.cadence_s = 0.02
clock.step_ppm = 0.1
controller.kp = 25
link.pipeline_frames = 15.25
)",
        R"(name = long_link
topology.kind = complete
topology.n = 8
fiber = 0, 2, 2000
sim.mode = ddc_then_reframe
sim.duration_s = 40
sim.seed = 2
reframe.at_seconds = 30
clock.step_ppm = 0.01
controller.kp = 0.25
link.pipeline_frames = 15.25
)"}},
      {"torus",
       {R"(name = torus
topology.kind = torus
topology.dims = 6,6,6
sim.mode = ddc
sim.duration_s = 2
sim.seed = 6
telemetry.cadence_s = 0.02
clock.step_ppm = 0.1
controller.kp = 25
controller.period_ticks = 1250
)",
        R"(name = torus
topology.kind = torus
topology.dims = 22,22,22
sim.mode = ddc
sim.duration_s = 0.05
sim.seed = 22
telemetry.cadence_s = 0.01
clock.step_ppm = 0.1
controller.kp = 25
controller.period_ticks = 12500
)"}},
  };
  return table;
}

}  // namespace

std::vector<std::string> suite_names() {
  return {"fully_connected", "hourglass", "cube", "long_link", "realistic", "torus"};
}

std::string suite_config_text(const std::string& name, SuiteScale scale) {
  const auto it = suites().find(name);
  if (it == suites().end()) throw ConfigError("unknown suite `" + name + "`");
  return scale == SuiteScale::desk ? it->second.desk : it->second.full;
}

ExperimentConfig suite_config(const std::string& name, SuiteScale scale) {
  ExperimentConfig cfg = parse_config(suite_config_text(name, scale));
  cfg.output_dir = std::filesystem::path("out") / name;
  return cfg;
}

}  // namespace bittide
