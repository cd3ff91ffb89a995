#include "omtree/cost.hpp"
#include "omtree/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omtree {

void CostWeights::validate() const {
  if (beta1 < 0.0 || beta2 < 0.0 || beta3 < 0.0 || !(beta1 + beta2 + beta3 > 0.0))
    throw Error(ErrorCode::InvalidArgument, "cost weights must be non-negative with positive sum");
}

void NormalizationSpec::validate() const {
  if (!(bw_ref > 0.0) || !(delay_ref > 0.0))
    throw Error(ErrorCode::InvalidArgument, "normalization references must be positive");
}

NormalizationSpec NormalizationSpec::for_topology(const Topology& topo) {
  return NormalizationSpec{topo.max_bw_capacity(), topo.max_delay()};
}

namespace {

PathMetrics fold(const Topology& topo, const Path& path) {
  if (path.size() < 2) throw Error(ErrorCode::InvalidPath, "path needs at least two nodes");
  PathMetrics m;
  m.bw_bottleneck = std::numeric_limits<double>::infinity();
  double keep = 1.0;
  for (std::size_t h = 0; h + 1 < path.size(); ++h) {
    const LinkState& l = topo.link(path[h], path[h + 1]);
    m.bw_bottleneck = std::min(m.bw_bottleneck, l.bw_residual);
    m.delay_total += l.delay;
    keep *= 1.0 - l.loss;
  }
  m.loss_total = 1.0 - keep;
  return m;
}

}  // namespace

PathMetrics path_metrics(const Topology& topo, const Path& path) {
  if (!is_simple(path)) throw Error(ErrorCode::InvalidPath, "path revisits a node");
  return fold(topo, path);
}

PathMetrics route_metrics(const Topology& topo, const Path& route) { return fold(topo, route); }

NormalizedTriple normalize_metrics(const PathMetrics& m, const NormalizationSpec& spec) {
  return {std::clamp(m.bw_bottleneck / spec.bw_ref, 0.0, 1.0),
          std::clamp(m.delay_total / spec.delay_ref, 0.0, 1.0), std::clamp(m.loss_total, 0.0, 1.0)};
}

NormalizedTriple normalize_metrics(const LinkState& l, const NormalizationSpec& spec) {
  return {std::clamp(l.bw_residual / spec.bw_ref, 0.0, 1.0),
          std::clamp(l.delay / spec.delay_ref, 0.0, 1.0), std::clamp(l.loss, 0.0, 1.0)};
}

double edge_cost(const NormalizedTriple& x, const CostWeights& w) {
  return w.beta1 * (1.0 - x.bw) + w.beta2 * x.delay + w.beta3 * x.loss;
}

double link_reward(const NormalizedTriple& x, const CostWeights& w) {
  return w.beta1 * (x.bw - 1.0) - w.beta2 * x.delay - w.beta3 * x.loss;
}

double path_cost(const Topology& topo, const Path& path, const CostWeights& w,
                 const NormalizationSpec& spec) {
  return edge_cost(normalize_metrics(path_metrics(topo, path), spec), w);
}

double path_link_reward(const Topology& topo, const Path& path, const CostWeights& w,
                        const NormalizationSpec& spec) {
  if (path.size() < 2) throw Error(ErrorCode::InvalidPath, "path needs at least two nodes");
  double sum = 0.0;
  for (std::size_t h = 0; h + 1 < path.size(); ++h)
    sum += link_reward(normalize_metrics(topo.link(path[h], path[h + 1]), spec), w);
  return sum;
}

double tree_cost(const OverlayTree& tree, const Topology& topo, const CostWeights& w,
                 const NormalizationSpec& spec) {
  double total = 0.0;
  for (const auto& c : tree.entries()) total += path_cost(topo, c.path, w, spec);
  return total;
}

}  // namespace omtree
