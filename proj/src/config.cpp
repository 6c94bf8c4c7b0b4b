#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bittide/experiment.hpp"

namespace bittide {

namespace {

constexpr double kDefaultLatency = 10e-9;     // up to 2 m of cable
constexpr double kDefaultFiberSpeed = 2.0309e8;  // 2000 m holds 1231 frames at 125 MHz

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = text.find('\n', start);
      std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      const std::string stripped = trim(line);
      if (!stripped.empty()) {
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) fail(line_no, "expected `key = value`");
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (key == "link" || key == "fiber") {
          repeated_.push_back({key, value, line_no});
        } else {
          if (values_.count(key)) fail(line_no, "duplicate key `" + key + "`");
          values_[key] = {value, line_no};
        }
      }
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
  }

  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  struct Repeated {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };

  [[noreturn]] static void fail(std::size_t line, const std::string& message) {
    throw ConfigError("config line " + std::to_string(line) + ": " + message);
  }

  const Entry* take(const std::string& key) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  static double to_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "`" + s + "` is not a number");
    return v;
  }

  static std::int64_t to_int(const std::string& s, std::size_t line) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "`" + s + "` is not an integer");
    return v;
  }

  static std::size_t to_index(const std::string& s, std::size_t line) {
    const std::int64_t v = to_int(s, line);
    if (v < 0) fail(line, "`" + s + "` must be non-negative");
    return static_cast<std::size_t>(v);
  }

  static bool to_bool(const std::string& s, std::size_t line) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(line, "`" + s + "` is not a boolean");
  }

  void number(const std::string& key, double& out) {
    if (const Entry* e = take(key)) out = to_double(e->value, e->line);
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const Entry* e = take(key)) {
      const std::int64_t v = to_int(e->value, e->line);
      if constexpr (std::is_unsigned_v<Int>) {
        if (v < 0) fail(e->line, "`" + key + "` must be non-negative");
      }
      out = static_cast<Int>(v);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const Entry* e = take(key)) out = to_bool(e->value, e->line);
  }
  void text(const std::string& key, std::string& out) {
    if (const Entry* e = take(key)) out = e->value;
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const Entry* e = take(key)) {
      out.clear();
      for (const auto& item : split(e->value, ',')) out.push_back(to_double(item, e->line));
    }
  }

  void reject_unused() const {
    for (const auto& [key, entry] : values_) {
      if (!used_.count(key)) fail(entry.line, "unknown key `" + key + "`");
    }
  }

  const std::vector<Repeated>& repeated() const { return repeated_; }

 private:
  std::map<std::string, Entry> values_;
  std::set<std::string> used_;
  std::vector<Repeated> repeated_;
};

Topology build_topology(Parser& p) {
  std::string kind = "complete";
  GeneratorParams params;
  double latency = kDefaultLatency;
  double fiber_speed = kDefaultFiberSpeed;
  p.text("topology.kind", kind);
  p.integer("topology.n", params.n);
  if (const auto* e = p.take("topology.dims")) {
    for (const auto& item : split(e->value, ',')) params.dims.push_back(Parser::to_index(item, e->line));
  }
  p.number("topology.latency_s", latency);
  p.number("topology.fiber_speed_mps", fiber_speed);
  if (!(fiber_speed > 0.0)) throw ConfigError("topology.fiber_speed_mps must be positive");

  struct Override {
    NodeId src;
    NodeId dst;
    double latency;
    std::size_t line;
  };
  std::vector<Override> overrides;
  for (const auto& r : p.repeated()) {
    const auto fields = split(r.value, r.value.find(',') != std::string::npos ? ',' : ' ');
    std::vector<std::string> parts;
    for (const auto& f : fields) {
      if (!f.empty()) parts.push_back(f);
    }
    if (parts.size() != 3) Parser::fail(r.line, "`" + r.key + "` needs `src, dst, value`");
    const double value = Parser::to_double(parts[2], r.line);
    overrides.push_back({Parser::to_index(parts[0], r.line), Parser::to_index(parts[1], r.line),
                         r.key == "fiber" ? value / fiber_speed : value, r.line});
  }

  Topology topo;
  if (kind == "explicit") {
    std::vector<Link> links;
    for (const auto& o : overrides) links.push_back({o.src, o.dst, o.latency});
    return Topology(params.n, std::move(links));
  }
  const auto parsed = parse_topology_kind(kind);
  if (!parsed) throw ConfigError("unknown topology.kind `" + kind + "`");
  topo = generate(*parsed, params, latency);
  for (const auto& o : overrides) {
    try {
      topo = set_link_latency(topo, o.src, o.dst, o.latency);
    } catch (const ConfigError& e) {
      Parser::fail(o.line, e.what());
    }
  }
  return topo;
}

std::vector<std::vector<NodeId>> parse_partition(const std::string& value, std::size_t line) {
  std::vector<std::vector<NodeId>> out;
  for (const auto& group : split(value, ';')) {
    std::vector<NodeId> members;
    for (const auto& item : split(group, ',')) {
      if (!item.empty()) members.push_back(Parser::to_index(item, line));
    }
    if (!members.empty()) out.push_back(std::move(members));
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  Parser p(text);
  ExperimentConfig cfg;
  SimConfig& sim = cfg.sim;

  p.text("name", cfg.name);
  if (const auto* e = p.take("output.dir")) cfg.output_dir = e->value;
  p.boolean("output.svg", cfg.svg);

  sim.topology = build_topology(p);

  if (const auto* e = p.take("sim.mode")) {
    const auto mode = parse_buffer_mode(e->value);
    if (!mode) Parser::fail(e->line, "unknown sim.mode `" + e->value + "`");
    sim.mode = *mode;
  }
  if (const auto* e = p.take("engine.kind")) {
    if (e->value == "model") {
      cfg.engine = EngineKind::model;
    } else if (e->value == "frames") {
      cfg.engine = EngineKind::frames;
    } else {
      Parser::fail(e->line, "engine.kind must be `model` or `frames`");
    }
  }
  p.number("sim.duration_s", sim.duration_s);
  p.integer("sim.seed", sim.seed);
  p.number("telemetry.cadence_s", sim.cadence_s);
  p.boolean("telemetry.record_measurements", sim.record_measurements);
  p.boolean("telemetry.record_pulses", sim.record_pulses);

  p.number("clock.nominal_hz", sim.clock.nominal_hz);
  p.number("clock.offset_bound_ppm", sim.clock.offset_bound_ppm);
  p.numbers("clock.offsets_ppm", sim.clock.offsets_ppm);
  p.number("clock.step_ppm", sim.clock.step_ppm);
  p.number("clock.min_pulse_interval_s", sim.clock.min_pulse_interval_s);
  p.integer("clock.phase_spread", sim.clock.phase_spread);
  p.numbers("clock.initial_phases", sim.clock.initial_phases);

  p.integer("buffers.depth", sim.buffers.depth);
  p.integer("buffers.eb_init", sim.buffers.eb_init);
  p.integer("buffers.counter_bits", sim.buffers.counter_bits);

  p.number("controller.kp", sim.controller.kp);
  p.number("controller.gain_scale", sim.controller.gain_scale);
  sim.controller.beta_off =
      sim.mode == BufferMode::elastic ? static_cast<double>(sim.buffers.depth) / 2.0 : 0.0;
  p.number("controller.beta_off", sim.controller.beta_off);
  p.integer("controller.period_ticks", sim.controller.period_ticks);
  p.integer("controller.delay_ticks", sim.controller.delay_ticks);

  p.number("link.pipeline_frames", sim.pipeline_frames);
  p.number("link.pipeline_jitter_frames", sim.pipeline_jitter_frames);
  if (const auto* e = p.take("reframe.at_seconds")) sim.reframe_at_s = Parser::to_double(e->value, e->line);
  p.number("engine.divergence_ppm", sim.divergence_ppm);

  p.number("stats.band_ppm", cfg.band_ppm);
  if (const auto* e = p.take("stats.partition")) {
    cfg.partition = parse_partition(e->value, e->line);
    for (const auto& group : cfg.partition) {
      for (NodeId n : group) {
        if (n >= sim.topology.size()) Parser::fail(e->line, "partition names unknown node " + std::to_string(n));
      }
    }
  }

  p.reject_unused();
  sim.check();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace bittide
