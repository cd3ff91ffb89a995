#pragma once

#include "omtree/net_model.hpp"
#include "omtree/overlay.hpp"

namespace omtree {

struct CostWeights {
  double beta1 = 1.0 / 3.0;  // bandwidth
  double beta2 = 1.0 / 3.0;  // delay
  double beta3 = 1.0 / 3.0;  // loss

  void validate() const;
};

struct PathMetrics {
  double bw_bottleneck = 0.0;  // Mbps
  double delay_total = 0.0;    // ms
  double loss_total = 0.0;     // fraction
};

/// Fixed reference scales; loss is used as-is.
struct NormalizationSpec {
  double bw_ref = 40.0;
  double delay_ref = 10.0;

  void validate() const;
  /// bw_ref = max capacity, delay_ref = max link delay of the topology.
  static NormalizationSpec for_topology(const Topology& topo);
};

struct NormalizedTriple {
  double bw = 0.0, delay = 0.0, loss = 0.0;
};

/// Bottleneck / sum / 1-prod(1-loss) over a simple path of adjacent hops.
PathMetrics path_metrics(const Topology& topo, const Path& path);
/// Same fold without the simplicity requirement (end-to-end overlay routes).
PathMetrics route_metrics(const Topology& topo, const Path& route);

NormalizedTriple normalize_metrics(const PathMetrics& m, const NormalizationSpec& spec);
NormalizedTriple normalize_metrics(const LinkState& l, const NormalizationSpec& spec);

/// f = b1(1 - bw) + b2 delay + b3 loss.
double edge_cost(const NormalizedTriple& x, const CostWeights& w);
/// R_link = b1(bw - 1) - b2 delay - b3 loss.
double link_reward(const NormalizedTriple& x, const CostWeights& w);

/// edge_cost of a whole underlay path.
double path_cost(const Topology& topo, const Path& path, const CostWeights& w,
                 const NormalizationSpec& spec);
/// Sum of per-link rewards along a path.
double path_link_reward(const Topology& topo, const Path& path, const CostWeights& w,
                        const NormalizationSpec& spec);

/// Sum of overlay-edge costs, in request destination order.
double tree_cost(const OverlayTree& tree, const Topology& topo, const CostWeights& w,
                 const NormalizationSpec& spec);

}  // namespace omtree
