#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

#include "bittide/experiment.hpp"

namespace bittide {

namespace {

struct Trace {
  std::vector<double> t;
  std::vector<double> v;
};

std::map<NodeId, Trace> by_node(const std::vector<FrequencySample>& samples, TraceColumn column) {
  std::map<NodeId, Trace> out;
  for (const auto& s : samples) {
    Trace& tr = out[s.node];
    tr.t.push_back(s.t);
    tr.v.push_back(column == TraceColumn::freq_offset ? s.freq_offset_ppm : s.c_est_ppm);
  }
  for (auto& [node, tr] : out) {
    const double last = tr.v.back();
    for (double& x : tr.v) x -= last;
  }
  return out;
}

double interpolate(const Trace& tr, double t) {
  const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), t);
  const auto k = static_cast<std::size_t>(it - tr.t.begin());
  if (k < tr.t.size() && tr.t[k] == t) return tr.v[k];
  const double w = (t - tr.t[k - 1]) / (tr.t[k] - tr.t[k - 1]);
  return tr.v[k - 1] + w * (tr.v[k] - tr.v[k - 1]);
}

std::vector<FrequencySample> load_freq(const std::filesystem::path& dir) {
  const auto path = dir / "freq.csv";
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return read_freq_csv(in);
}

}  // namespace

std::optional<TraceColumn> parse_trace_column(const std::string& name) {
  if (name == "freq_offset_ppm" || name == "freq") return TraceColumn::freq_offset;
  if (name == "c_est_ppm" || name == "c_est") return TraceColumn::c_est;
  return std::nullopt;
}

CompareReport compare_traces(const std::vector<FrequencySample>& a, const std::vector<FrequencySample>& b,
                             TraceColumn column_a, TraceColumn column_b) {
  const auto ta = by_node(a, column_a);
  const auto tb = by_node(b, column_b);
  if (ta.empty() || ta.size() != tb.size() ||
      !std::equal(ta.begin(), ta.end(), tb.begin(), [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw ConfigError("traces cover different node sets");
  }

  CompareReport report;
  for (const auto& [node, tra] : ta) {
    const Trace& trb = tb.at(node);
    NodeDiff d;
    d.node = node;
    double sum = 0.0;
    for (std::size_t k = 0; k < tra.t.size(); ++k) {
      const double t = tra.t[k];
      if (t < trb.t.front() || t > trb.t.back()) continue;
      const double diff = std::abs(tra.v[k] - interpolate(trb, t));
      d.max_abs_ppm = std::max(d.max_abs_ppm, diff);
      sum += diff;
      ++d.samples;
    }
    if (d.samples == 0) throw ConfigError("traces do not overlap in time for node " + std::to_string(node));
    d.mean_abs_ppm = sum / static_cast<double>(d.samples);
    report.max_abs_ppm = std::max(report.max_abs_ppm, d.max_abs_ppm);
    report.nodes.push_back(d);
  }
  return report;
}

CompareReport compare_runs(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                           TraceColumn column_a, TraceColumn column_b) {
  return compare_traces(load_freq(dir_a), load_freq(dir_b), column_a, column_b);
}

void write_compare_report(std::ostream& out, const CompareReport& report) {
  out << "node,max_abs_ppm,mean_abs_ppm,samples\n";
  for (const auto& d : report.nodes) {
    out << d.node << ',' << d.max_abs_ppm << ',' << d.mean_abs_ppm << ',' << d.samples << '\n';
  }
  out << "max_abs_ppm: " << report.max_abs_ppm << '\n';
}

}  // namespace bittide
