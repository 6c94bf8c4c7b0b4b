#include <algorithm>
#include <limits>

#include "bittide/engine.hpp"

namespace bittide {

namespace {

double spread_of(const std::vector<double>& values, const std::vector<NodeId>& members) {
  if (members.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (NodeId n : members) {
    lo = std::min(lo, values[n]);
    hi = std::max(hi, values[n]);
  }
  return hi - lo;
}

std::optional<double> time_to_band(const std::vector<double>& times, const std::vector<double>& spread,
                                   double band) {
  std::optional<double> result;
  for (std::size_t k = spread.size(); k-- > 0;) {
    if (spread[k] >= band) break;
    result = times[k];
  }
  return result;
}

}  // namespace

ConvergenceSummary convergence_stats(const std::vector<FrequencySample>& frequency,
                                     std::size_t n_nodes, double band_ppm,
                                     const std::vector<std::vector<NodeId>>& partition) {
  ConvergenceSummary out;
  out.part_spread_ppm.resize(partition.size());

  std::vector<NodeId> everyone(n_nodes);
  for (NodeId i = 0; i < n_nodes; ++i) everyone[i] = i;

  std::vector<double> values(n_nodes, 0.0);
  std::size_t k = 0;
  while (k < frequency.size()) {
    const double t = frequency[k].t;
    for (; k < frequency.size() && frequency[k].t == t; ++k) {
      if (frequency[k].node < n_nodes) values[frequency[k].node] = frequency[k].freq_offset_ppm;
    }
    out.times.push_back(t);
    out.spread_ppm.push_back(spread_of(values, everyone));
    std::vector<double> means;
    for (std::size_t p = 0; p < partition.size(); ++p) {
      out.part_spread_ppm[p].push_back(spread_of(values, partition[p]));
      double sum = 0.0;
      for (NodeId n : partition[p]) sum += values[n];
      if (!partition[p].empty()) means.push_back(sum / static_cast<double>(partition[p].size()));
    }
    if (!partition.empty()) {
      const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
      out.inter_part_spread_ppm.push_back(means.empty() ? 0.0 : *hi - *lo);
    }
  }

  out.time_to_band = time_to_band(out.times, out.spread_ppm, band_ppm);
  for (const auto& part : out.part_spread_ppm) {
    out.part_time_to_band.push_back(time_to_band(out.times, part, band_ppm));
  }
  if (!out.spread_ppm.empty()) out.final_spread_ppm = out.spread_ppm.back();
  return out;
}

ConvergenceSummary convergence_stats(const Telemetry& telemetry, double band_ppm,
                                     const std::vector<std::vector<NodeId>>& partition) {
  return convergence_stats(telemetry.frequency, telemetry.n_nodes, band_ppm, partition);
}

}  // namespace bittide
