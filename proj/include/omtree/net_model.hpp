#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace omtree {

using NodeId = int;

/// Per-link measured state. Bandwidths in Mbps, delay in ms, loss a fraction.
struct LinkState {
  double bw_max = 0.0;
  double bw_residual = 0.0;
  double delay = 0.0;
  double loss = 0.0;

  bool valid() const;
  bool operator==(const LinkState&) const = default;
};

/// Unordered node pair, stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge make(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  bool operator==(const Edge&) const = default;
  auto operator<=>(const Edge&) const = default;
};

/// Undirected connected underlay graph with per-link state. Immutable once
/// built; traffic updates produce a new value via with_link_states().
class Topology {
 public:
  Topology() = default;
  /// Validates: connected, no self-loops, no duplicate edges, link states legal.
  Topology(int node_count, std::vector<Edge> edges, std::vector<LinkState> links);

  int node_count() const { return node_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<LinkState>& links() const { return links_; }

  bool has_edge(NodeId a, NodeId b) const { return edge_index(a, b) >= 0; }
  /// Index into edges()/links(), or -1 when not adjacent.
  int edge_index(NodeId a, NodeId b) const;
  const LinkState& link(NodeId a, NodeId b) const;
  /// Neighbors sorted by id.
  const std::vector<NodeId>& neighbors(NodeId v) const { return adjacency_[v]; }
  int degree(NodeId v) const { return static_cast<int>(adjacency_[v].size()); }

  Topology with_link_states(std::vector<LinkState> links) const;

  double max_bw_capacity() const;
  double max_delay() const;

  bool operator==(const Topology& o) const {
    return node_count_ == o.node_count_ && edges_ == o.edges_ && links_ == o.links_;
  }

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<LinkState> links_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<int> index_;  // node_count^2, -1 for absent
};

/// BFS hop counts from src; -1 for unreachable nodes.
std::vector<int> bfs_hops(const Topology& topo, NodeId src);
bool is_connected(int node_count, const std::vector<Edge>& edges);

enum class NamedTopology { Net10, Net14, Net21 };

std::optional<NamedTopology> parse_named_topology(std::string_view name);
std::string to_string(NamedTopology name);
int node_count_of(NamedTopology name);

struct TopologyGenOptions {
  double bw_min = 5.0, bw_max = 40.0;
  double delay_min = 1.0, delay_max = 10.0;
  double loss_min = 0.0, loss_max = 0.05;
  // Background utilization; residual = bw_max * (1 - u).
  double util_min = 0.0, util_max = 0.3;
};

/// Ring plus n/2 seeded random chords, link parameters drawn uniformly.
Topology build_named_topology(NamedTopology name, std::uint64_t seed,
                              const TopologyGenOptions& opts = {});
Topology build_random_topology(int node_count, int chords, std::uint64_t seed,
                               const TopologyGenOptions& opts = {});

enum class TrafficMode { Static, RandomWalk };
std::optional<TrafficMode> parse_traffic_mode(std::string_view s);
std::string to_string(TrafficMode m);

struct RandomWalkOptions {
  double bw_step_fraction = 0.05;  // of bw_max
  double loss_step = 0.002;
};

/// Static returns the input; random-walk takes one bounded seeded step on
/// residual bandwidth and loss per link. Delay and edges never change.
Topology advance_traffic(const Topology& topo, TrafficMode mode, std::uint64_t seed,
                         const RandomWalkOptions& opts = {});

// Topology text format:
//   nodes N
//   i j bw_max delay loss [bw_residual]
// '#' starts a comment line. Without the residual column the link is idle.
Topology read_topology(std::istream& in);
Topology load_topology(const std::string& path);
void write_topology(std::ostream& out, const Topology& topo, bool with_residual = true);

}  // namespace omtree
