#pragma once

#include "omtree/net_model.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace omtree {

using Path = std::vector<NodeId>;

/// One source, distinct destinations (request order is the agent index order).
struct MulticastRequest {
  NodeId source = 0;
  std::vector<NodeId> destinations;

  int destination_count() const { return static_cast<int>(destinations.size()); }
  /// Index of dest in destinations, or -1.
  int index_of(NodeId dest) const;
  /// Source then destinations.
  std::vector<NodeId> overlay_nodes() const;
  void validate(int node_count) const;
};

/// Permutation of the request's destinations.
struct Sequence {
  std::vector<NodeId> order;
  void validate(const MulticastRequest& req) const;
};

/// S_k = {v_s} ∪ {n_1..n_{k-1}}, k is 1-based. Returned in that order.
std::vector<NodeId> candidate_set(const MulticastRequest& req, const Sequence& seq, int k);

struct OverlayChoice {
  NodeId parent = 0;
  Path path;  // parent ... destination
};

/// Overlay spanning tree rooted at the source. Entries are indexed like
/// request.destinations.
class OverlayTree {
 public:
  OverlayTree() = default;
  /// Validates: one entry per destination, endpoint-consistent simple paths,
  /// parent links form a tree rooted at the source.
  OverlayTree(MulticastRequest req, std::vector<OverlayChoice> entries);

  const MulticastRequest& request() const { return request_; }
  const std::vector<OverlayChoice>& entries() const { return entries_; }
  const OverlayChoice& entry(NodeId dest) const;
  int edge_count() const { return static_cast<int>(entries_.size()); }

  /// Checks every hop is a link of the topology.
  void validate_against(const Topology& topo) const;

  bool operator==(const OverlayTree&) const;

 private:
  MulticastRequest request_;
  std::vector<OverlayChoice> entries_;
};

bool operator==(const MulticastRequest& a, const MulticastRequest& b);
bool operator==(const OverlayChoice& a, const OverlayChoice& b);

/// choices[k-1] is the (parent, path) for sequence position k; parent must be in S_k.
OverlayTree assemble_tree(const MulticastRequest& req, const Sequence& seq,
                          const std::vector<OverlayChoice>& choices);

/// Concatenation of underlay paths from the source down to dest; junction
/// nodes appear once. Underlay nodes may repeat across overlay edges.
Path end_to_end_route(const OverlayTree& tree, NodeId dest);

bool is_simple(const Path& path);
std::vector<Edge> path_to_edges(const Path& path);
/// Inverse of path_to_edges for a simple path starting at start.
Path edges_to_path(NodeId start, const std::vector<Edge>& edges);

// Tree text format, one line per destination:  dest parent : n0 n1 ... nk
// Lines starting with '#' are comments; "# cost <value>" is recognised.
void write_tree(std::ostream& out, const OverlayTree& tree, std::optional<double> cost = {});
struct TreeFile {
  OverlayTree tree;
  std::optional<double> cost;
};
/// Source is inferred as the unique parent that is not a destination.
TreeFile read_tree(std::istream& in);
TreeFile load_tree(const std::string& path);
void save_tree(const std::string& path, const OverlayTree& tree, std::optional<double> cost = {});

}  // namespace omtree
