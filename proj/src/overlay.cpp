#include "omtree/overlay.hpp"
#include "omtree/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace omtree {

int MulticastRequest::index_of(NodeId dest) const {
  auto it = std::find(destinations.begin(), destinations.end(), dest);
  return it == destinations.end() ? -1 : static_cast<int>(it - destinations.begin());
}

std::vector<NodeId> MulticastRequest::overlay_nodes() const {
  std::vector<NodeId> nodes{source};
  nodes.insert(nodes.end(), destinations.begin(), destinations.end());
  return nodes;
}

void MulticastRequest::validate(int node_count) const {
  if (destinations.empty()) throw Error(ErrorCode::InvalidArgument, "request has no destinations");
  if (source < 0 || source >= node_count)
    throw Error(ErrorCode::InvalidArgument, "source out of range");
  std::set<NodeId> seen;
  for (NodeId d : destinations) {
    if (d < 0 || d >= node_count)
      throw Error(ErrorCode::InvalidArgument, "destination " + std::to_string(d) + " out of range");
    if (d == source) throw Error(ErrorCode::InvalidArgument, "source listed as destination");
    if (!seen.insert(d).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate destination " + std::to_string(d));
  }
}

void Sequence::validate(const MulticastRequest& req) const {
  if (order.size() != req.destinations.size())
    throw Error(ErrorCode::InvalidArgument, "sequence length differs from destination count");
  std::vector<NodeId> a = order, b = req.destinations;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b) throw Error(ErrorCode::InvalidArgument, "sequence is not a permutation of the destinations");
}

std::vector<NodeId> candidate_set(const MulticastRequest& req, const Sequence& seq, int k) {
  if (k < 1 || k > static_cast<int>(seq.order.size()))
    throw Error(ErrorCode::InvalidArgument, "candidate set index out of range");
  seq.validate(req);
  std::vector<NodeId> s{req.source};
  s.insert(s.end(), seq.order.begin(), seq.order.begin() + (k - 1));
  return s;
}

bool operator==(const MulticastRequest& a, const MulticastRequest& b) {
  return a.source == b.source && a.destinations == b.destinations;
}

bool operator==(const OverlayChoice& a, const OverlayChoice& b) {
  return a.parent == b.parent && a.path == b.path;
}

bool OverlayTree::operator==(const OverlayTree& o) const {
  return request_ == o.request_ && entries_ == o.entries_;
}

bool is_simple(const Path& path) {
  std::set<NodeId> seen(path.begin(), path.end());
  return seen.size() == path.size();
}

OverlayTree::OverlayTree(MulticastRequest req, std::vector<OverlayChoice> entries)
    : request_(std::move(req)), entries_(std::move(entries)) {
  const int n = request_.destination_count();
  if (static_cast<int>(entries_.size()) != n)
    throw Error(ErrorCode::InvalidTree, "need exactly one entry per destination");
  {
    std::set<NodeId> seen;
    for (NodeId d : request_.destinations)
      if (d == request_.source || !seen.insert(d).second)
        throw Error(ErrorCode::InvalidTree, "duplicate destination " + std::to_string(d));
  }
  for (int i = 0; i < n; ++i) {
    const NodeId dest = request_.destinations[i];
    const OverlayChoice& c = entries_[i];
    if (c.parent == dest) throw Error(ErrorCode::InvalidTree, "destination parented by itself");
    if (c.parent != request_.source && request_.index_of(c.parent) < 0)
      throw Error(ErrorCode::InvalidTree, "parent " + std::to_string(c.parent) + " is not an overlay node");
    if (c.path.size() < 2 || c.path.front() != c.parent || c.path.back() != dest)
      throw Error(ErrorCode::InvalidTree, "path endpoints do not match (parent, destination) for " +
                                              std::to_string(dest));
    if (!is_simple(c.path))
      throw Error(ErrorCode::InvalidTree, "underlay path to " + std::to_string(dest) + " is not simple");
  }
  // Every parent chain must reach the source without revisiting.
  for (int i = 0; i < n; ++i) {
    NodeId cur = request_.destinations[i];
    for (int hops = 0; cur != request_.source; ++hops) {
      if (hops > n) throw Error(ErrorCode::InvalidTree, "overlay parent links contain a cycle");
      cur = entries_[request_.index_of(cur)].parent;
    }
  }
}

const OverlayChoice& OverlayTree::entry(NodeId dest) const {
  const int i = request_.index_of(dest);
  if (i < 0) throw Error(ErrorCode::InvalidTree, "no entry for " + std::to_string(dest));
  return entries_[i];
}

void OverlayTree::validate_against(const Topology& topo) const {
  for (const auto& c : entries_) {
    for (std::size_t h = 0; h + 1 < c.path.size(); ++h) {
      if (!topo.has_edge(c.path[h], c.path[h + 1]))
        throw Error(ErrorCode::InvalidPath, "hop " + std::to_string(c.path[h]) + "-" +
                                                std::to_string(c.path[h + 1]) + " is not a link");
    }
  }
}

OverlayTree assemble_tree(const MulticastRequest& req, const Sequence& seq,
                          const std::vector<OverlayChoice>& choices) {
  try {
    seq.validate(req);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidTree, e.what());
  }
  if (choices.size() != seq.order.size())
    throw Error(ErrorCode::InvalidTree, "one choice per sequence position required");
  std::vector<OverlayChoice> entries(req.destinations.size());
  for (std::size_t k = 0; k < choices.size(); ++k) {
    const NodeId dest = seq.order[k];
    const auto cands = candidate_set(req, seq, static_cast<int>(k) + 1);
    if (std::find(cands.begin(), cands.end(), choices[k].parent) == cands.end())
      throw Error(ErrorCode::InvalidTree, "parent " + std::to_string(choices[k].parent) +
                                              " not in candidate set for position " +
                                              std::to_string(k + 1));
    entries[req.index_of(dest)] = choices[k];
  }
  return OverlayTree(req, std::move(entries));
}

Path end_to_end_route(const OverlayTree& tree, NodeId dest) {
  std::vector<const Path*> chain;
  const NodeId source = tree.request().source;
  for (NodeId cur = dest; cur != source;) {
    const OverlayChoice& c = tree.entry(cur);
    chain.push_back(&c.path);
    cur = c.parent;
  }
  Path route;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Path& p = **it;
    route.insert(route.end(), p.begin() + (route.empty() ? 0 : 1), p.end());
  }
  return route;
}

std::vector<Edge> path_to_edges(const Path& path) {
  std::vector<Edge> edges;
  for (std::size_t h = 0; h + 1 < path.size(); ++h) edges.push_back(Edge::make(path[h], path[h + 1]));
  return edges;
}

Path edges_to_path(NodeId start, const std::vector<Edge>& edges) {
  Path path{start};
  std::vector<char> used(edges.size(), 0);
  for (std::size_t step = 0; step < edges.size(); ++step) {
    const NodeId cur = path.back();
    bool advanced = false;
    for (std::size_t k = 0; k < edges.size() && !advanced; ++k) {
      if (used[k]) continue;
      if (edges[k].u == cur || edges[k].v == cur) {
        used[k] = 1;
        path.push_back(edges[k].u == cur ? edges[k].v : edges[k].u);
        advanced = true;
      }
    }
    if (!advanced) throw Error(ErrorCode::InvalidPath, "edge set does not form a path from start");
  }
  return path;
}

void write_tree(std::ostream& out, const OverlayTree& tree, std::optional<double> cost) {
  if (cost) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *cost);
    out << "# cost " << std::string(buf, p) << '\n';
  }
  const auto& req = tree.request();
  for (std::size_t i = 0; i < req.destinations.size(); ++i) {
    const auto& c = tree.entries()[i];
    out << req.destinations[i] << ' ' << c.parent << " :";
    for (NodeId n : c.path) out << ' ' << n;
    out << '\n';
  }
}

TreeFile read_tree(std::istream& in) {
  std::string line;
  std::optional<double> cost;
  std::vector<NodeId> dests;
  std::vector<OverlayChoice> entries;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') {
      std::string key;
      if (ls >> key && key == "cost") {
        std::string v;
        ls >> v;
        double c = 0.0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), c);
        if (ec != std::errc()) throw Error(ErrorCode::Parse, "bad cost line");
        cost = c;
      }
      continue;
    }
    std::istringstream full(line);
    NodeId dest = 0, parent = 0;
    std::string colon;
    if (!(full >> dest >> parent >> colon) || colon != ":")
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected 'dest parent : path'");
    OverlayChoice c;
    c.parent = parent;
    for (NodeId n; full >> n;) c.path.push_back(n);
    if (!full.eof()) throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad path");
    dests.push_back(dest);
    entries.push_back(std::move(c));
  }
  std::set<NodeId> dest_set(dests.begin(), dests.end());
  std::optional<NodeId> source;
  for (const auto& c : entries) {
    if (!dest_set.count(c.parent)) {
      if (source && *source != c.parent) throw Error(ErrorCode::InvalidTree, "tree has two roots");
      source = c.parent;
    }
  }
  if (!source) throw Error(ErrorCode::InvalidTree, "tree has no root");
  MulticastRequest req{*source, dests};
  return TreeFile{OverlayTree(req, std::move(entries)), cost};
}

TreeFile load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open tree file " + path);
  return read_tree(in);
}

void save_tree(const std::string& path, const OverlayTree& tree, std::optional<double> cost) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write tree file " + path);
  write_tree(out, tree, cost);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace omtree
