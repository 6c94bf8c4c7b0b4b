#include "bittide/topology.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <utility>

#include "bittide/error.hpp"

namespace bittide {

Topology::Topology(std::size_t n_nodes, std::vector<Link> links)
    : n_nodes_(n_nodes), links_(std::move(links)) {
  for (const auto& l : links_) {
    if (l.src >= n_nodes_ || l.dst >= n_nodes_) {
      throw ConfigError("link " + std::to_string(l.src) + "->" + std::to_string(l.dst) +
                        " has an endpoint outside [0, " + std::to_string(n_nodes_) + ")");
    }
  }
  index();
}

void Topology::index() {
  incoming_.assign(n_nodes_, {});
  outgoing_.assign(n_nodes_, {});
  for (std::size_t i = 0; i < links_.size(); ++i) {
    incoming_[links_[i].dst].push_back(i);
    outgoing_[links_[i].src].push_back(i);
  }
}

std::optional<std::size_t> Topology::find_link(NodeId src, NodeId dst) const {
  if (src >= n_nodes_) return std::nullopt;
  for (std::size_t i : outgoing_[src]) {
    if (links_[i].dst == dst) return i;
  }
  return std::nullopt;
}

std::vector<NodeId> Topology::neighbors(NodeId node) const {
  std::vector<NodeId> out;
  for (std::size_t i : outgoing_.at(node)) out.push_back(links_[i].dst);
  for (std::size_t i : incoming_.at(node)) out.push_back(links_[i].src);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Topology::max_latency() const noexcept {
  double m = 0.0;
  for (const auto& l : links_) m = std::max(m, l.latency_s);
  return m;
}

std::optional<TopologyKind> parse_topology_kind(const std::string& name) {
  if (name == "complete") return TopologyKind::complete;
  if (name == "hourglass") return TopologyKind::hourglass;
  if (name == "cube") return TopologyKind::cube;
  if (name == "torus") return TopologyKind::torus;
  return std::nullopt;
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::complete: return "complete";
    case TopologyKind::hourglass: return "hourglass";
    case TopologyKind::cube: return "cube";
    case TopologyKind::torus: return "torus";
  }
  return "?";
}

namespace {

// Emits both directions for every undirected edge.
Topology from_edges(std::size_t n, const std::set<std::pair<NodeId, NodeId>>& edges,
                    double latency) {
  std::vector<Link> links;
  links.reserve(edges.size() * 2);
  for (auto [a, b] : edges) {
    links.push_back({a, b, latency});
    links.push_back({b, a, latency});
  }
  return Topology(n, std::move(links));
}

void add_edge(std::set<std::pair<NodeId, NodeId>>& edges, NodeId a, NodeId b) {
  if (a == b) return;
  edges.insert({std::min(a, b), std::max(a, b)});
}

Topology torus(const std::vector<std::size_t>& dims, double latency) {
  if (dims.empty()) throw ConfigError("torus needs at least one dimension");
  for (auto k : dims) {
    if (k < 2) throw ConfigError("torus dimensions must all be >= 2");
  }
  const std::size_t n =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());

  std::set<std::pair<NodeId, NodeId>> edges;
  std::vector<std::size_t> coord(dims.size(), 0);
  for (NodeId node = 0; node < n; ++node) {
    std::size_t stride = 1;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      const std::size_t k = dims[d];
      const std::size_t next = (coord[d] + 1) % k;
      const NodeId neighbor = node + (next - coord[d]) * stride;  // unsigned wrap is intended
      add_edge(edges, node, neighbor);
      stride *= k;
    }
    for (std::size_t d = 0; d < dims.size(); ++d) {
      if (++coord[d] < dims[d]) break;
      coord[d] = 0;
    }
  }
  return from_edges(n, edges, latency);
}

}  // namespace

Topology generate(TopologyKind kind, const GeneratorParams& params, double default_latency_s) {
  if (!(default_latency_s > 0.0)) throw ConfigError("default latency must be positive");
  std::set<std::pair<NodeId, NodeId>> edges;
  switch (kind) {
    case TopologyKind::complete: {
      if (params.n < 2) throw ConfigError("complete topology needs n >= 2");
      for (NodeId a = 0; a < params.n; ++a)
        for (NodeId b = a + 1; b < params.n; ++b) add_edge(edges, a, b);
      return from_edges(params.n, edges, default_latency_s);
    }
    case TopologyKind::hourglass: {
      for (NodeId base : {NodeId{0}, NodeId{4}})
        for (NodeId a = 0; a < 4; ++a)
          for (NodeId b = a + 1; b < 4; ++b) add_edge(edges, base + a, base + b);
      add_edge(edges, 3, 4);
      return from_edges(8, edges, default_latency_s);
    }
    case TopologyKind::cube: {
      for (NodeId a = 0; a < 8; ++a)
        for (unsigned bit = 0; bit < 3; ++bit) add_edge(edges, a, a ^ (NodeId{1} << bit));
      return from_edges(8, edges, default_latency_s);
    }
    case TopologyKind::torus:
      return torus(params.dims, default_latency_s);
  }
  throw ConfigError("unknown topology kind");
}

Topology set_link_latency(const Topology& topo, NodeId src, NodeId dst, double latency_s) {
  const auto idx = topo.find_link(src, dst);
  if (!idx) {
    throw ConfigError("no link " + std::to_string(src) + "->" + std::to_string(dst));
  }
  std::vector<Link> links(topo.links().begin(), topo.links().end());
  links[*idx].latency_s = latency_s;
  return Topology(topo.size(), std::move(links));
}

std::size_t count_components(const Topology& topo) {
  std::vector<NodeId> parent(topo.size());
  std::iota(parent.begin(), parent.end(), NodeId{0});
  std::function<NodeId(NodeId)> find = [&](NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  std::size_t components = topo.size();
  for (const auto& l : topo.links()) {
    const NodeId a = find(l.src);
    const NodeId b = find(l.dst);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

ValidationReport validate(const Topology& topo) {
  ValidationReport report;
  if (topo.size() == 0) report.errors.push_back("topology has no nodes");
  for (const auto& l : topo.links()) {
    const std::string name = std::to_string(l.src) + "->" + std::to_string(l.dst);
    if (l.src == l.dst) report.errors.push_back("self loop on node " + std::to_string(l.src));
    if (!(l.latency_s > 0.0)) report.errors.push_back("non-positive latency on link " + name);
    if (!topo.find_link(l.dst, l.src)) {
      report.warnings.push_back("link " + name + " has no reverse direction");
    }
  }
  if (topo.size() > 0 && count_components(topo) > 1) {
    report.errors.push_back("topology is disconnected (" +
                            std::to_string(count_components(topo)) + " components)");
  }
  return report;
}

}  // namespace bittide
