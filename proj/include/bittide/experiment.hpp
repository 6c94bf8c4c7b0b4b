#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bittide/engine.hpp"

namespace bittide {

struct ExperimentConfig {
  std::string name = "run";
  SimConfig sim;
  EngineKind engine = EngineKind::model;
  std::filesystem::path output_dir = "out";
  std::vector<std::vector<NodeId>> partition;  ///< optional node groups for clique statistics
  double band_ppm = 1.0;
  bool svg = false;
};

/// Parses the flat `key = value` format documented in docs/config.md.
/// Throws ConfigError with the offending line number.
ExperimentConfig parse_config(std::string_view text);

/// Throws IoError if unreadable, ConfigError if malformed.
ExperimentConfig load_config(const std::filesystem::path& path);

/// One row of latency.csv. Directions absent from the topology are empty.
struct LatencyEntry {
  NodeId node = 0;
  std::size_t link_index = 0;  ///< 1-based position of `peer` among the node's neighbors
  NodeId peer = 0;
  std::optional<std::int64_t> lambda_out;
  std::optional<std::int64_t> lambda_in;
  std::optional<std::int64_t> rtt;
};

std::vector<LatencyEntry> latency_table(const Telemetry& telemetry, const Topology& topology);

struct RunSummary {
  std::string name;
  std::string engine;
  ConvergenceSummary convergence;
  double band_ppm = 1.0;
  std::vector<LatencyEntry> latency;
  std::optional<FaultRecord> fault;
  EventCounts counts;
  std::optional<double> reframe_time_s;
  double wall_seconds = 0.0;
};

RunSummary summarize(const Telemetry& telemetry, const ExperimentConfig& config, double wall_seconds);

void write_freq_csv(std::ostream& out, const Telemetry& telemetry);
void write_buffers_csv(std::ostream& out, const Telemetry& telemetry);
void write_latency_csv(std::ostream& out, const std::vector<LatencyEntry>& table);
void write_summary(std::ostream& out, const RunSummary& summary);

/// Throws ConfigError on malformed rows.
std::vector<FrequencySample> read_freq_csv(std::istream& in);
std::vector<OccupancySample> read_buffers_csv(std::istream& in);

std::string frequency_svg(const Telemetry& telemetry);
std::string buffers_svg(const Telemetry& telemetry);

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitFault = 2, kExitIo = 3 };

struct RunOutcome {
  RunSummary summary;
  Telemetry telemetry;
  int exit_code = kExitOk;
};

/// Runs the experiment and writes freq.csv, buffers.csv, latency.csv,
/// summary.txt (and the SVG charts when enabled) to config.output_dir.
/// Simulation faults are reported through exit_code; IO failures throw
/// IoError.
RunOutcome run_experiment(const ExperimentConfig& config);

struct NodeDiff {
  NodeId node = 0;
  double max_abs_ppm = 0.0;
  double mean_abs_ppm = 0.0;
  std::size_t samples = 0;
};

struct CompareReport {
  std::vector<NodeDiff> nodes;
  double max_abs_ppm = 0.0;
};

enum class TraceColumn { freq_offset, c_est };

std::optional<TraceColumn> parse_trace_column(const std::string& name);

/// Compares two frequency traces node by node after shifting each trace so
/// its final sample is zero. Trace b is linearly interpolated at the sample
/// times of a that fall inside its range. Throws ConfigError if the node sets
/// differ or the time ranges do not overlap.
CompareReport compare_traces(const std::vector<FrequencySample>& a, const std::vector<FrequencySample>& b,
                             TraceColumn column_a = TraceColumn::freq_offset,
                             TraceColumn column_b = TraceColumn::freq_offset);

/// compare_traces on the freq.csv files of two run directories.
CompareReport compare_runs(const std::filesystem::path& dir_a, const std::filesystem::path& dir_b,
                           TraceColumn column_a = TraceColumn::freq_offset,
                           TraceColumn column_b = TraceColumn::freq_offset);

void write_compare_report(std::ostream& out, const CompareReport& report);

enum class SuiteScale { desk, full };

std::vector<std::string> suite_names();

/// Bundled configuration text for a named experiment. Throws ConfigError for
/// unknown names.
std::string suite_config_text(const std::string& name, SuiteScale scale);

ExperimentConfig suite_config(const std::string& name, SuiteScale scale);

}  // namespace bittide
