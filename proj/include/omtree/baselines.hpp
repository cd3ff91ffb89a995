#pragma once

#include "omtree/cost.hpp"
#include "omtree/net_model.hpp"
#include "omtree/overlay.hpp"

#include <cstddef>
#include <vector>

namespace omtree {

inline constexpr std::size_t kDefaultPathBudget = 1'000'000;

/// Every simple path src..dst with at most max_nodes nodes, in lexicographic
/// order. Throws BudgetExceeded past budget paths.
std::vector<Path> enumerate_simple_paths(const Topology& topo, NodeId src, NodeId dst, int max_nodes,
                                         std::size_t budget = kDefaultPathBudget);

struct CostedPath {
  Path path;
  double cost = 0.0;
};

/// Minimum edge_cost simple path; ties keep the lexicographically smallest.
CostedPath min_cost_path(const Topology& topo, NodeId src, NodeId dst, const CostWeights& w,
                         const NormalizationSpec& spec, std::size_t budget = kDefaultPathBudget);

/// Minimum-hop path from the source to each destination, lexicographically
/// smallest among ties; every destination hangs off the source.
OverlayTree ospf_tree(const Topology& topo, const MulticastRequest& req);
/// Lexicographically smallest minimum-hop path.
Path min_hop_path(const Topology& topo, NodeId src, NodeId dst);

struct OracleResult {
  OverlayTree tree;
  double cost = 0.0;
  Sequence sequence;
  std::size_t sequences_examined = 0;
  std::size_t assignments_examined = 0;
  std::size_t paths_examined = 0;
};

/// Exhaustive search over destination orders, parent assignments within the
/// candidate sets and minimum-cost paths per overlay edge.
OracleResult brute_force_optimum(const Topology& topo, const MulticastRequest& req, const CostWeights& w,
                                 const NormalizationSpec& spec, std::size_t budget = kDefaultPathBudget);

/// Prim-style: repeatedly attach the unattached destination with the
/// cheapest minimum-cost path from any attached node.
OverlayTree greedy_tree(const Topology& topo, const MulticastRequest& req, const CostWeights& w,
                        const NormalizationSpec& spec);

}  // namespace omtree
