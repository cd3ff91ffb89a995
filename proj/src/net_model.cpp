#include "omtree/net_model.hpp"
#include "omtree/error.hpp"
#include "omtree/numfmt.hpp"
#include "omtree/rng.hpp"
#include "omtree/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>

namespace omtree {

bool LinkState::valid() const {
  return std::isfinite(bw_max) && std::isfinite(bw_residual) && std::isfinite(delay) &&
         std::isfinite(loss) && bw_max > 0.0 && bw_residual >= 0.0 && bw_residual <= bw_max &&
         delay > 0.0 && loss >= 0.0 && loss < 1.0;
}

Topology::Topology(int node_count, std::vector<Edge> edges, std::vector<LinkState> links)
    : node_count_(node_count), edges_(std::move(edges)), links_(std::move(links)) {
  if (node_count_ <= 0) throw Error(ErrorCode::InvalidArgument, "node count must be positive");
  if (edges_.size() != links_.size())
    throw Error(ErrorCode::CountMismatch, "one link state per edge required");
  index_.assign(static_cast<std::size_t>(node_count_) * node_count_, -1);
  adjacency_.assign(node_count_, {});
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    Edge& e = edges_[k];
    e = Edge::make(e.u, e.v);
    if (e.u < 0 || e.v >= node_count_)
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    if (e.u == e.v) throw Error(ErrorCode::InvalidArgument, "self-loop at node " + std::to_string(e.u));
    auto& slot = index_[static_cast<std::size_t>(e.u) * node_count_ + e.v];
    if (slot >= 0)
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
    if (!links_[k].valid())
      throw Error(ErrorCode::InvalidArgument,
                  "illegal link state on " + std::to_string(e.u) + "-" + std::to_string(e.v));
    slot = static_cast<int>(k);
    index_[static_cast<std::size_t>(e.v) * node_count_ + e.u] = static_cast<int>(k);
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
  if (!is_connected(node_count_, edges_))
    throw Error(ErrorCode::DisconnectedGraph, "topology is not connected");
}

int Topology::edge_index(NodeId a, NodeId b) const {
  if (a < 0 || b < 0 || a >= node_count_ || b >= node_count_) return -1;
  return index_[static_cast<std::size_t>(a) * node_count_ + b];
}

const LinkState& Topology::link(NodeId a, NodeId b) const {
  const int k = edge_index(a, b);
  if (k < 0)
    throw Error(ErrorCode::InvalidPath,
                "no link between " + std::to_string(a) + " and " + std::to_string(b));
  return links_[k];
}

Topology Topology::with_link_states(std::vector<LinkState> links) const {
  return Topology(node_count_, edges_, std::move(links));
}

double Topology::max_bw_capacity() const {
  double m = 0.0;
  for (const auto& l : links_) m = std::max(m, l.bw_max);
  return m;
}

double Topology::max_delay() const {
  double m = 0.0;
  for (const auto& l : links_) m = std::max(m, l.delay);
  return m;
}

std::vector<int> bfs_hops(const Topology& topo, NodeId src) {
  std::vector<int> dist(topo.node_count(), -1);
  std::queue<NodeId> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId w : topo.neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push(w);
      }
    }
  }
  return dist;
}

bool is_connected(int node_count, const std::vector<Edge>& edges) {
  // Union-find, independent of the adjacency built by Topology.
  std::vector<int> parent(node_count);
  for (int i = 0; i < node_count; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = node_count;
  for (const auto& e : edges) {
    int a = find(e.u), b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

std::optional<NamedTopology> parse_named_topology(std::string_view name) {
  if (name == "10NodeNet") return NamedTopology::Net10;
  if (name == "14NodeNet") return NamedTopology::Net14;
  if (name == "21NodeNet") return NamedTopology::Net21;
  return std::nullopt;
}

std::string to_string(NamedTopology name) {
  switch (name) {
    case NamedTopology::Net10: return "10NodeNet";
    case NamedTopology::Net14: return "14NodeNet";
    case NamedTopology::Net21: return "21NodeNet";
  }
  return "?";
}

int node_count_of(NamedTopology name) {
  switch (name) {
    case NamedTopology::Net10: return 10;
    case NamedTopology::Net14: return 14;
    case NamedTopology::Net21: return 21;
  }
  return 0;
}

namespace {

LinkState draw_link(const TopologyGenOptions& o, Rng& rng) {
  LinkState l;
  l.bw_max = rng.uniform(o.bw_min, o.bw_max);
  l.delay = rng.uniform(o.delay_min, o.delay_max);
  l.loss = rng.uniform(o.loss_min, o.loss_max);
  l.bw_residual = l.bw_max * (1.0 - rng.uniform(o.util_min, o.util_max));
  return l;
}

}  // namespace

Topology build_random_topology(int node_count, int chords, std::uint64_t seed,
                               const TopologyGenOptions& opts) {
  if (node_count < 2) throw Error(ErrorCode::InvalidArgument, "need at least two nodes");
  Rng rng(derive_seed(seed, "topology", static_cast<std::uint64_t>(node_count)));
  std::vector<Edge> edges;
  if (node_count == 2) {
    edges.push_back({0, 1});
  } else {
    for (int i = 0; i < node_count; ++i) edges.push_back(Edge::make(i, (i + 1) % node_count));
  }
  const int possible = node_count * (node_count - 1) / 2 - static_cast<int>(edges.size());
  chords = std::min(chords, possible);
  std::vector<char> used(static_cast<std::size_t>(node_count) * node_count, 0);
  for (const auto& e : edges) used[static_cast<std::size_t>(e.u) * node_count + e.v] = 1;
  while (chords > 0) {
    int a = static_cast<int>(rng.below(node_count));
    int b = static_cast<int>(rng.below(node_count));
    if (a == b) continue;
    Edge e = Edge::make(a, b);
    auto& u = used[static_cast<std::size_t>(e.u) * node_count + e.v];
    if (u) continue;
    u = 1;
    edges.push_back(e);
    --chords;
  }
  std::sort(edges.begin(), edges.end());
  std::vector<LinkState> links;
  links.reserve(edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) links.push_back(draw_link(opts, rng));
  return Topology(node_count, std::move(edges), std::move(links));
}

Topology build_named_topology(NamedTopology name, std::uint64_t seed,
                              const TopologyGenOptions& opts) {
  const int n = node_count_of(name);
  return build_random_topology(n, n / 2, seed, opts);
}

std::optional<TrafficMode> parse_traffic_mode(std::string_view s) {
  if (s == "static") return TrafficMode::Static;
  if (s == "random-walk") return TrafficMode::RandomWalk;
  return std::nullopt;
}

std::string to_string(TrafficMode m) {
  return m == TrafficMode::Static ? "static" : "random-walk";
}

Topology advance_traffic(const Topology& topo, TrafficMode mode, std::uint64_t seed,
                         const RandomWalkOptions& opts) {
  if (mode == TrafficMode::Static) return topo;
  Rng rng(derive_seed(seed, "traffic"));
  std::vector<LinkState> links = topo.links();
  for (auto& l : links) {
    const double db = rng.uniform(-1.0, 1.0) * opts.bw_step_fraction * l.bw_max;
    const double dl = rng.uniform(-1.0, 1.0) * opts.loss_step;
    l.bw_residual = std::clamp(l.bw_residual + db, 0.0, l.bw_max);
    l.loss = std::clamp(l.loss + dl, 0.0, 1.0 - kLossEpsilon);
  }
  return topo.with_link_states(std::move(links));
}

namespace {

double parse_double(const std::string& tok, int line_no) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
  return v;
}

int parse_int(const std::string& tok, int line_no) {
  int v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad integer '" + tok + "'");
  return v;
}

}  // namespace

Topology read_topology(std::istream& in) {
  std::string line;
  int line_no = 0;
  int nodes = -1;
  std::vector<Edge> edges;
  std::vector<LinkState> links;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (nodes < 0) {
      if (tok.size() != 2 || tok[0] != "nodes")
        throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 'nodes N'");
      nodes = parse_int(tok[1], line_no);
      continue;
    }
    if (tok.size() != 5 && tok.size() != 6)
      throw Error(ErrorCode::Parse,
                  "line " + std::to_string(line_no) + ": expected 'i j bw_max delay loss [bw_residual]'");
    Edge e{parse_int(tok[0], line_no), parse_int(tok[1], line_no)};
    LinkState l;
    l.bw_max = parse_double(tok[2], line_no);
    l.delay = parse_double(tok[3], line_no);
    l.loss = parse_double(tok[4], line_no);
    l.bw_residual = tok.size() == 6 ? parse_double(tok[5], line_no) : l.bw_max;
    edges.push_back(e);
    links.push_back(l);
  }
  if (nodes < 0) throw Error(ErrorCode::Parse, "missing 'nodes N' header");
  return Topology(nodes, std::move(edges), std::move(links));
}

Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open topology file " + path);
  return read_topology(in);
}

void write_topology(std::ostream& out, const Topology& topo, bool with_residual) {
  out << "nodes " << topo.node_count() << '\n';
  for (int k = 0; k < topo.edge_count(); ++k) {
    const Edge& e = topo.edges()[k];
    const LinkState& l = topo.links()[k];
    out << e.u << ' ' << e.v << ' ' << format_double(l.bw_max) << ' ' << format_double(l.delay)
        << ' ' << format_double(l.loss);
    if (with_residual) out << ' ' << format_double(l.bw_residual);
    out << '\n';
  }
}

}  // namespace omtree
