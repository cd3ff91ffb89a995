#include "omtree/baselines.hpp"
#include "omtree/error.hpp"

#include <algorithm>
#include <numeric>

namespace omtree {

namespace {

void dfs_paths(const Topology& topo, NodeId dst, int max_nodes, std::size_t budget, Path& cur,
               std::vector<char>& on_path, std::vector<Path>& out) {
  const NodeId v = cur.back();
  if (v == dst) {
    if (out.size() >= budget)
      throw Error(ErrorCode::BudgetExceeded, "simple-path enumeration exceeded its budget");
    out.push_back(cur);
    return;
  }
  if (static_cast<int>(cur.size()) >= max_nodes) return;
  for (NodeId u : topo.neighbors(v)) {
    if (on_path[u]) continue;
    on_path[u] = 1;
    cur.push_back(u);
    dfs_paths(topo, dst, max_nodes, budget, cur, on_path, out);
    cur.pop_back();
    on_path[u] = 0;
  }
}

void check_node(const Topology& topo, NodeId v) {
  if (v < 0 || v >= topo.node_count())
    throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(v) + " out of range");
}

}  // namespace

std::vector<Path> enumerate_simple_paths(const Topology& topo, NodeId src, NodeId dst, int max_nodes,
                                         std::size_t budget) {
  check_node(topo, src);
  check_node(topo, dst);
  if (max_nodes < 1 || max_nodes > topo.node_count())
    throw Error(ErrorCode::InvalidArgument, "max path length must be in [1, node count]");
  std::vector<Path> out;
  Path cur{src};
  std::vector<char> on_path(static_cast<std::size_t>(topo.node_count()), 0);
  on_path[src] = 1;
  dfs_paths(topo, dst, max_nodes, budget, cur, on_path, out);
  return out;
}

CostedPath min_cost_path(const Topology& topo, NodeId src, NodeId dst, const CostWeights& w,
                         const NormalizationSpec& spec, std::size_t budget) {
  if (src == dst) throw Error(ErrorCode::InvalidArgument, "path endpoints coincide");
  const auto paths = enumerate_simple_paths(topo, src, dst, topo.node_count(), budget);
  CostedPath best;
  for (const auto& p : paths) {
    const double c = path_cost(topo, p, w, spec);
    if (best.path.empty() || c < best.cost) best = {p, c};
  }
  if (best.path.empty()) throw Error(ErrorCode::DisconnectedGraph, "no path between endpoints");
  return best;
}

Path min_hop_path(const Topology& topo, NodeId src, NodeId dst) {
  check_node(topo, src);
  check_node(topo, dst);
  const std::vector<int> to_dst = bfs_hops(topo, dst);
  if (to_dst[src] < 0) throw Error(ErrorCode::DisconnectedGraph, "destination unreachable");
  // Walking downhill in distance-to-destination, smallest id first, gives
  // the lexicographically smallest shortest path.
  Path p{src};
  while (p.back() != dst) {
    const NodeId v = p.back();
    for (NodeId u : topo.neighbors(v)) {
      if (to_dst[u] == to_dst[v] - 1) {
        p.push_back(u);
        break;
      }
    }
  }
  return p;
}

OverlayTree ospf_tree(const Topology& topo, const MulticastRequest& req) {
  req.validate(topo.node_count());
  std::vector<OverlayChoice> entries;
  for (NodeId d : req.destinations) entries.push_back({req.source, min_hop_path(topo, req.source, d)});
  return OverlayTree(req, std::move(entries));
}

OracleResult brute_force_optimum(const Topology& topo, const MulticastRequest& req, const CostWeights& w,
                                 const NormalizationSpec& spec, std::size_t budget) {
  req.validate(topo.node_count());
  const int nd = req.destination_count();
  if (nd > 4 || topo.node_count() > 12)
    throw Error(ErrorCode::BudgetExceeded, "oracle limited to 4 destinations on 12 nodes");
  OracleResult res;

  // Best path for every ordered overlay pair (parent, destination).
  const std::vector<NodeId> overlay = req.overlay_nodes();
  const int no = static_cast<int>(overlay.size());
  std::vector<CostedPath> pair(static_cast<std::size_t>(no * no));
  for (int a = 0; a < no; ++a)
    for (int b = 1; b < no; ++b) {
      if (a == b) continue;
      const auto paths = enumerate_simple_paths(topo, overlay[a], overlay[b], topo.node_count(), budget);
      res.paths_examined += paths.size();
      CostedPath best;
      for (const auto& p : paths) {
        const double c = path_cost(topo, p, w, spec);
        if (best.path.empty() || c < best.cost) best = {p, c};
      }
      pair[static_cast<std::size_t>(a * no + b)] = std::move(best);
    }

  std::vector<int> perm(static_cast<std::size_t>(nd));
  std::iota(perm.begin(), perm.end(), 0);
  bool have = false;
  std::vector<int> best_parent;  // overlay index of each destination's parent, by destination index
  double best_cost = 0.0;
  std::vector<int> best_perm;
  do {
    ++res.sequences_examined;
    // choice[k] indexes S_k = {source, perm[0..k-1]}.
    std::vector<int> choice(static_cast<std::size_t>(nd), 0);
    while (true) {
      ++res.assignments_examined;
      std::vector<int> parent(static_cast<std::size_t>(nd));
      for (int k = 0; k < nd; ++k)
        parent[perm[k]] = choice[k] == 0 ? 0 : perm[choice[k] - 1] + 1;
      // Summed in destination order, matching tree_cost.
      double c = 0.0;
      for (int d = 0; d < nd; ++d) c += pair[static_cast<std::size_t>(parent[d] * no + d + 1)].cost;
      if (!have || c < best_cost) {
        have = true;
        best_cost = c;
        best_parent = parent;
        best_perm = perm;
      }
      int k = nd - 1;
      while (k >= 0 && choice[k] == k) choice[k--] = 0;
      if (k < 0) break;
      ++choice[k];
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<OverlayChoice> entries;
  for (int d = 0; d < nd; ++d) {
    const int p = best_parent[d];
    entries.push_back({overlay[p], pair[static_cast<std::size_t>(p * no + d + 1)].path});
  }
  res.tree = OverlayTree(req, std::move(entries));
  res.cost = tree_cost(res.tree, topo, w, spec);
  for (int i : best_perm) res.sequence.order.push_back(req.destinations[i]);
  return res;
}

OverlayTree greedy_tree(const Topology& topo, const MulticastRequest& req, const CostWeights& w,
                        const NormalizationSpec& spec) {
  req.validate(topo.node_count());
  const int nd = req.destination_count();
  std::vector<NodeId> attached{req.source};
  std::vector<char> done(static_cast<std::size_t>(nd), 0);
  std::vector<OverlayChoice> entries(static_cast<std::size_t>(nd));
  for (int round = 0; round < nd; ++round) {
    int best_d = -1;
    CostedPath best;
    NodeId best_parent = 0;
    for (int d = 0; d < nd; ++d) {
      if (done[d]) continue;
      for (NodeId a : attached) {
        CostedPath cp = min_cost_path(topo, a, req.destinations[d], w, spec);
        if (best_d < 0 || cp.cost < best.cost) {
          best_d = d;
          best = std::move(cp);
          best_parent = a;
        }
      }
    }
    done[best_d] = 1;
    attached.push_back(req.destinations[best_d]);
    entries[best_d] = {best_parent, std::move(best.path)};
  }
  return OverlayTree(req, std::move(entries));
}

}  // namespace omtree
