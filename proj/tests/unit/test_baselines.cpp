#include "omtree/baselines.hpp"
#include "omtree/error.hpp"
#include "omtree/rng.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace omtree;

namespace {

LinkState idle(double bw, double delay, double loss) { return LinkState{bw, bw, delay, loss}; }

// Independent counter: plain recursion over adjacency without ordering.
std::size_t count_paths(const Topology& t, NodeId at, NodeId dst, std::vector<char>& seen) {
  if (at == dst) return 1;
  std::size_t n = 0;
  for (NodeId v = 0; v < t.node_count(); ++v) {
    if (seen[v] || !t.has_edge(at, v)) continue;
    seen[v] = 1;
    n += count_paths(t, v, dst, seen);
    seen[v] = 0;
  }
  return n;
}

MulticastRequest random_request(int n, int k, Rng& rng) {
  std::vector<NodeId> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(nodes[i], nodes[rng.below(i + 1)]);
  return MulticastRequest{nodes[0], std::vector<NodeId>(nodes.begin() + 1, nodes.begin() + 1 + k)};
}

}  // namespace

TEST(SimplePaths, Triangle) {
  const Topology tri(3, {Edge::make(0, 1), Edge::make(1, 2), Edge::make(0, 2)},
                     {idle(10, 1, 0), idle(10, 1, 0), idle(10, 1, 0)});
  const auto paths = enumerate_simple_paths(tri, 0, 1, 3);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(paths[0], (Path{0, 1}));
  EXPECT_EQ(paths[1], (Path{0, 2, 1}));
  EXPECT_EQ(enumerate_simple_paths(tri, 0, 1, 2).size(), 1u);
}

TEST(SimplePaths, MatchesReferenceCountOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Topology t = build_random_topology(7, 4, seed);
    std::vector<char> seen(7, 0);
    seen[0] = 1;
    const auto paths = enumerate_simple_paths(t, 0, 5, 7);
    EXPECT_EQ(paths.size(), count_paths(t, 0, 5, seen));
    std::set<Path> distinct(paths.begin(), paths.end());
    EXPECT_EQ(distinct.size(), paths.size());
    for (const Path& p : paths) EXPECT_TRUE(is_simple(p));
  }
}

TEST(SimplePaths, BudgetExceeded) {
  const Topology t = build_random_topology(10, 10, 3);
  try {
    enumerate_simple_paths(t, 0, 5, 10, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
}

TEST(Ospf, StarIsOneHopAndBfsLengths) {
  std::vector<Edge> e;
  std::vector<LinkState> l;
  for (int i = 1; i < 5; ++i) {
    e.push_back(Edge::make(0, i));
    l.push_back(idle(10, 1, 0));
  }
  const Topology star(5, e, l);
  const OverlayTree t = ospf_tree(star, MulticastRequest{0, {1, 3, 4}});
  for (const auto& c : t.entries()) EXPECT_EQ(c.path.size(), 2u);

  const Topology g = build_named_topology(NamedTopology::Net14, 5);
  const MulticastRequest req{2, {0, 7, 11, 13}};
  const auto hops = bfs_hops(g, 2);
  const OverlayTree o = ospf_tree(g, req);
  for (NodeId d : req.destinations) {
    EXPECT_EQ(o.entry(d).parent, 2);
    EXPECT_EQ(static_cast<int>(o.entry(d).path.size()) - 1, hops[d]);
  }
  EXPECT_EQ(ospf_tree(g, req), o);
}

TEST(Ospf, LexicographicTieBreak) {
  // Square 0-1-3, 0-2-3: both two hops, 0-1-3 wins.
  const Topology sq(4, {Edge::make(0, 1), Edge::make(1, 3), Edge::make(0, 2), Edge::make(2, 3)},
                    {idle(10, 1, 0), idle(10, 1, 0), idle(10, 1, 0), idle(10, 1, 0)});
  EXPECT_EQ(min_hop_path(sq, 0, 3), (Path{0, 1, 3}));
  EXPECT_EQ(min_hop_path(sq, 3, 0), (Path{3, 1, 0}));
}

TEST(Oracle, SingleDestinationIsBestPath) {
  const Topology g = build_named_topology(NamedTopology::Net10, 7);
  const CostWeights w;
  const NormalizationSpec spec;
  const OracleResult r = brute_force_optimum(g, MulticastRequest{0, {6}}, w, spec);
  double best = 1e300;
  for (const Path& p : enumerate_simple_paths(g, 0, 6, 10)) best = std::min(best, path_cost(g, p, w, spec));
  EXPECT_EQ(r.cost, best);
  EXPECT_EQ(r.cost, tree_cost(r.tree, g, w, spec));
  EXPECT_EQ(greedy_tree(g, MulticastRequest{0, {6}}, w, spec), r.tree);
}

TEST(Oracle, DominatesBaselinesOnRandomInstances) {
  const CostWeights w;
  const NormalizationSpec spec;
  Rng rng(77);
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 6 + static_cast<int>(rng.below(4));
    const Topology g = build_random_topology(n, n / 2, 1000 + inst);
    const MulticastRequest req = random_request(n, 1 + static_cast<int>(rng.below(3)), rng);
    const OracleResult r = brute_force_optimum(g, req, w, spec);
    EXPECT_EQ(r.cost, tree_cost(r.tree, g, w, spec));
    EXPECT_LE(r.cost, tree_cost(ospf_tree(g, req), g, w, spec) + 1e-12);
    EXPECT_LE(r.cost, tree_cost(greedy_tree(g, req, w, spec), g, w, spec) + 1e-12);
  }
}

TEST(Oracle, NoSingleSequenceBeatsIt) {
  const Topology g = build_named_topology(NamedTopology::Net10, 7);
  const MulticastRequest req{0, {3, 6, 9}};
  const CostWeights w;
  const NormalizationSpec spec;
  const OracleResult r = brute_force_optimum(g, req, w, spec);
  EXPECT_EQ(r.sequences_examined, 6u);
  // Star assignment per sequence is one of the searched trees: a lower bound check.
  std::vector<OverlayChoice> star;
  for (NodeId d : req.destinations) star.push_back({0, min_cost_path(g, 0, d, w, spec).path});
  EXPECT_LE(r.cost, tree_cost(OverlayTree(req, star), g, w, spec));
}

TEST(Oracle, RejectsOversizedInstances) {
  const Topology g = build_named_topology(NamedTopology::Net14, 1);
  EXPECT_THROW(brute_force_optimum(g, MulticastRequest{0, {1, 2}}, {}, {}), Error);
  const Topology h = build_named_topology(NamedTopology::Net10, 1);
  EXPECT_THROW(brute_force_optimum(h, MulticastRequest{0, {1, 2, 3, 4, 5}}, {}, {}), Error);
}
