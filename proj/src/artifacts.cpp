#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "bittide/experiment.hpp"

namespace bittide {

namespace {

std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ec == std::errc() ? ptr : buf.data());
}

std::string fmt(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); }

std::string fmt_time(const std::optional<double>& v) { return v ? fmt(*v) : std::string("none"); }

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

template <class T>
T parse_field(const std::string& s, std::size_t row) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("csv row " + std::to_string(row) + ": bad field `" + s + "`");
  }
  return v;
}

// Yields the data rows of a headered CSV after checking the header.
std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line) || line != header) throw ConfigError("csv header mismatch, expected " + header);
  const std::size_t columns = split_row(header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_row(line);
    if (fields.size() != columns) throw ConfigError("csv row " + std::to_string(row) + ": wrong column count");
    rows.push_back(std::move(fields));
  }
  return rows;
}

const std::string kFreqHeader = "t_seconds,node,freq_offset_ppm,c_est_ppm,net_steps";
const std::string kBuffersHeader = "t_seconds,node,src_node,occupancy_frames,mode";
const std::string kLatencyHeader = "node,link_index,peer,lambda_out,lambda_in,rtt";

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

const std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string line_chart(const std::string& title, const std::string& y_label, const std::vector<Series>& series) {
  constexpr double W = 800, H = 450, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 : 0.0;
    x1 = x0 + 1.0;
  }
  if (!(y1 > y0)) {
    y0 = std::isfinite(y0) ? y0 - 0.5 : 0.0;
    y1 = y0 + 1.0;
  }
  const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
      << "</text>\n"
      << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(xv) << "</text>\n"
        << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">time (s)</text>\n"
      << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << kPalette[k % kPalette.size()] << "\" points=\"";
    for (const auto& [x, y] : series[k].points) out << px(x) << ',' << py(y) << ' ';
    out << "\"><title>" << series[k].label << "</title></polyline>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

template <class Writer>
std::string render(Writer&& writer) {
  std::ostringstream out;
  writer(out);
  return out.str();
}

}  // namespace

std::vector<LatencyEntry> latency_table(const Telemetry& telemetry, const Topology& topology) {
  const auto lambda_of = [&](NodeId src, NodeId dst) -> std::optional<std::int64_t> {
    for (const auto& link : telemetry.links) {
      if (link.src == src && link.dst == dst) return link.lambda;
    }
    return std::nullopt;
  };
  std::vector<LatencyEntry> table;
  for (NodeId node = 0; node < topology.size(); ++node) {
    const auto peers = topology.neighbors(node);
    for (std::size_t k = 0; k < peers.size(); ++k) {
      LatencyEntry e;
      e.node = node;
      e.link_index = k + 1;
      e.peer = peers[k];
      e.lambda_out = lambda_of(node, peers[k]);
      e.lambda_in = lambda_of(peers[k], node);
      if (e.lambda_out && e.lambda_in) e.rtt = *e.lambda_out + *e.lambda_in;
      table.push_back(e);
    }
  }
  return table;
}

RunSummary summarize(const Telemetry& telemetry, const ExperimentConfig& config, double wall_seconds) {
  RunSummary s;
  s.name = config.name;
  s.engine = config.engine == EngineKind::model ? "model" : "frames";
  s.band_ppm = config.band_ppm;
  s.convergence = convergence_stats(telemetry, config.band_ppm, config.partition);
  s.latency = latency_table(telemetry, config.sim.topology);
  s.fault = telemetry.fault;
  s.counts = telemetry.counts;
  s.reframe_time_s = telemetry.reframe_time_s;
  s.wall_seconds = wall_seconds;
  return s;
}

void write_freq_csv(std::ostream& out, const Telemetry& telemetry) {
  out << kFreqHeader << '\n';
  for (const auto& r : telemetry.frequency) {
    out << fmt(r.t) << ',' << r.node << ',' << fmt(r.freq_offset_ppm) << ',' << fmt(r.c_est_ppm) << ','
        << r.net_steps << '\n';
  }
}

void write_buffers_csv(std::ostream& out, const Telemetry& telemetry) {
  out << kBuffersHeader << '\n';
  for (const auto& r : telemetry.occupancy) {
    out << fmt(r.t) << ',' << r.node << ',' << r.src << ',' << r.occupancy << ',' << (r.elastic ? "eb" : "ddc")
        << '\n';
  }
}

void write_latency_csv(std::ostream& out, const std::vector<LatencyEntry>& table) {
  out << kLatencyHeader << '\n';
  for (const auto& e : table) {
    out << e.node << ',' << e.link_index << ',' << e.peer << ',' << fmt(e.lambda_out) << ',' << fmt(e.lambda_in)
        << ',' << fmt(e.rtt) << '\n';
  }
}

void write_summary(std::ostream& out, const RunSummary& s) {
  const ConvergenceSummary& c = s.convergence;
  out << "name: " << s.name << '\n'
      << "engine: " << s.engine << '\n'
      << "status: " << (s.fault ? "fault" : "ok") << '\n';
  if (s.fault) {
    out << "fault: " << to_string(s.fault->kind) << " at " << fmt(s.fault->time_s) << " s: " << s.fault->message
        << '\n';
  }
  out << "band_ppm: " << fmt(s.band_ppm) << '\n'
      << "time_to_band_s: " << fmt_time(c.time_to_band) << '\n'
      << "final_spread_ppm: " << fmt(c.final_spread_ppm) << '\n';
  for (std::size_t p = 0; p < c.part_time_to_band.size(); ++p) {
    out << "part" << p << "_time_to_band_s: " << fmt_time(c.part_time_to_band[p]) << '\n';
  }
  out << "reframe_time_s: " << fmt_time(s.reframe_time_s) << '\n'
      << "measurements: " << s.counts.measurements << '\n'
      << "pulses: " << s.counts.pulses << '\n'
      << "suppressed_pulses: " << s.counts.suppressed_pulses << '\n'
      << "frames_sent: " << s.counts.frames_sent << '\n'
      << "frames_received: " << s.counts.frames_received << '\n'
      << "events: " << s.counts.events << '\n'
      << "wall_seconds: " << fmt(s.wall_seconds) << '\n';

  out << "\n[latency]\n";
  write_latency_csv(out, s.latency);

  out << "\n[spread]\nt_seconds,global";
  for (std::size_t p = 0; p < c.part_spread_ppm.size(); ++p) out << ",part" << p;
  if (!c.inter_part_spread_ppm.empty()) out << ",inter";
  out << '\n';
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    out << fmt(c.times[k]) << ',' << fmt(c.spread_ppm[k]);
    for (const auto& part : c.part_spread_ppm) out << ',' << fmt(part[k]);
    if (!c.inter_part_spread_ppm.empty()) out << ',' << fmt(c.inter_part_spread_ppm[k]);
    out << '\n';
  }
}

std::vector<FrequencySample> read_freq_csv(std::istream& in) {
  std::vector<FrequencySample> out;
  std::size_t row = 1;
  for (const auto& f : read_rows(in, kFreqHeader)) {
    ++row;
    out.push_back({parse_field<double>(f[0], row), parse_field<NodeId>(f[1], row), parse_field<double>(f[2], row),
                   parse_field<double>(f[3], row), parse_field<std::int64_t>(f[4], row)});
  }
  return out;
}

std::vector<OccupancySample> read_buffers_csv(std::istream& in) {
  std::vector<OccupancySample> out;
  std::size_t row = 1;
  for (const auto& f : read_rows(in, kBuffersHeader)) {
    ++row;
    if (f[4] != "ddc" && f[4] != "eb") throw ConfigError("csv row " + std::to_string(row) + ": bad mode");
    out.push_back({parse_field<double>(f[0], row), parse_field<NodeId>(f[1], row), parse_field<NodeId>(f[2], row),
                   parse_field<std::int64_t>(f[3], row), f[4] == "eb"});
  }
  return out;
}

std::string frequency_svg(const Telemetry& telemetry) {
  std::vector<Series> series(telemetry.n_nodes);
  for (NodeId n = 0; n < telemetry.n_nodes; ++n) series[n].label = "node " + std::to_string(n);
  for (const auto& r : telemetry.frequency) series.at(r.node).points.emplace_back(r.t, r.freq_offset_ppm);
  return line_chart("Clock frequencies", "offset (ppm)", series);
}

std::string buffers_svg(const Telemetry& telemetry) {
  std::vector<Series> series;
  std::vector<std::pair<NodeId, NodeId>> keys;
  for (const auto& r : telemetry.occupancy) {
    const std::pair<NodeId, NodeId> key{r.src, r.node};
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      series.push_back({std::to_string(r.src) + "->" + std::to_string(r.node), {}});
      it = keys.end() - 1;
    }
    series[static_cast<std::size_t>(it - keys.begin())].points.emplace_back(r.t, static_cast<double>(r.occupancy));
  }
  return line_chart("Buffer occupancies", "occupancy (frames)", series);
}

RunOutcome run_experiment(const ExperimentConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw IoError("cannot create " + config.output_dir.string() + ": " + ec.message());

  RunOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  outcome.telemetry = run_engine(config.sim, config.engine);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  outcome.summary = summarize(outcome.telemetry, config, wall);
  outcome.exit_code = outcome.telemetry.fault ? kExitFault : kExitOk;

  const auto& dir = config.output_dir;
  const Telemetry& t = outcome.telemetry;
  write_file(dir / "freq.csv", render([&](std::ostream& o) { write_freq_csv(o, t); }));
  write_file(dir / "buffers.csv", render([&](std::ostream& o) { write_buffers_csv(o, t); }));
  write_file(dir / "latency.csv", render([&](std::ostream& o) { write_latency_csv(o, outcome.summary.latency); }));
  write_file(dir / "summary.txt", render([&](std::ostream& o) { write_summary(o, outcome.summary); }));
  if (config.svg) {
    write_file(dir / "freq.svg", frequency_svg(t));
    write_file(dir / "buffers.svg", buffers_svg(t));
  }
  return outcome;
}

}  // namespace bittide
