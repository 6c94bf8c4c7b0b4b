#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bittide {

using NodeId = std::size_t;

/// One direction of a physical link. The reverse direction is a separate
/// Link and may carry a different latency.
struct Link {
  NodeId src = 0;
  NodeId dst = 0;
  double latency_s = 0.0;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Directed multigraph of nodes [0, n) and links between them.
class Topology {
 public:
  Topology() = default;

  /// Throws ConfigError if a link endpoint is out of range. Self loops and
  /// non-positive latencies are accepted here and reported by validate().
  Topology(std::size_t n_nodes, std::vector<Link> links);

  std::size_t size() const noexcept { return n_nodes_; }
  std::span<const Link> links() const noexcept { return links_; }
  const Link& link(std::size_t index) const { return links_.at(index); }

  std::optional<std::size_t> find_link(NodeId src, NodeId dst) const;

  /// Indices of links terminating at `node`, in link order.
  const std::vector<std::size_t>& incoming(NodeId node) const { return incoming_.at(node); }
  const std::vector<std::size_t>& outgoing(NodeId node) const { return outgoing_.at(node); }

  /// Sorted, deduplicated neighbors in either direction.
  std::vector<NodeId> neighbors(NodeId node) const;

  double max_latency() const noexcept;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.n_nodes_ == b.n_nodes_ && a.links_ == b.links_;
  }

 private:
  void index();

  std::size_t n_nodes_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
};

enum class TopologyKind { complete, hourglass, cube, torus };

std::optional<TopologyKind> parse_topology_kind(const std::string& name);
std::string to_string(TopologyKind kind);

struct GeneratorParams {
  std::size_t n = 8;                ///< node count for `complete`
  std::vector<std::size_t> dims;    ///< side lengths for `torus`
};

/// Builds a connected bidirectional topology; every direction carries
/// `default_latency_s`.
///
/// - complete: n >= 2, n(n-1) directed links
/// - hourglass: two K4 cliques {0..3} and {4..7} joined by the bridge 3<->4
/// - cube: 3-hypercube, i <-> i ^ (1 << b)
/// - torus: wraparound grid over dims, all k_i >= 2; duplicate neighbors
///   (k_i == 2) collapse to one link
Topology generate(TopologyKind kind, const GeneratorParams& params, double default_latency_s);

/// Returns a copy where only src->dst carries `latency_s`. Throws ConfigError
/// if the link does not exist.
Topology set_link_latency(const Topology& topo, NodeId src, NodeId dst, double latency_s);

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

/// Reports disconnectedness, self loops and non-positive latencies as errors,
/// and links with no reverse direction as warnings.
ValidationReport validate(const Topology& topo);

/// Number of weakly connected components.
std::size_t count_components(const Topology& topo);

}  // namespace bittide
