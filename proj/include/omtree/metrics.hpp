#pragma once

#include "omtree/cost.hpp"
#include "omtree/net_model.hpp"
#include "omtree/overlay.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace omtree {

struct RouteMetrics {
  NodeId destination = 0;
  Path route;  // end-to-end, source first
  PathMetrics metrics;
};

/// Means over the K end-to-end source-to-destination routes.
struct TreeMetrics {
  double avg_bottleneck_bw = 0.0;  // Mbps
  double avg_delay = 0.0;          // ms
  double avg_loss = 0.0;
  std::vector<RouteMetrics> routes;  // request destination order
};

TreeMetrics evaluate_tree(const OverlayTree& tree, const Topology& topo);

/// One metrics.csv row. Fields that do not apply hold NaN (written "nan").
struct MetricsRow {
  int episode = 0;
  std::string sequence;  // destinations joined by '-'
  double r_seq = 0.0;
  bool success = false;
  std::string success_flags;  // one 0/1 per sequence position
  int lower_steps = 0;
  double tree_cost = 0.0;
  double avg_bw = 0.0, avg_delay = 0.0, avg_loss = 0.0;
  double eval_cost = 0.0;  // greedy evaluation tree cost
  double ppo_policy_loss = 0.0, ppo_value_loss = 0.0, ppo_entropy = 0.0, ppo_mean_ratio = 0.0;
  double sac_critic_loss = 0.0, sac_policy_loss = 0.0, sac_alpha = 0.0;
  int sac_updates = 0;

  bool operator==(const MetricsRow& o) const;  // NaN fields compare equal
};

struct MetricsSummary {
  int best_episode = -1;
  double best_tree_cost = 0.0;
  std::optional<double> oracle_cost;
};

extern const char* const kMetricsHeader;

/// Header, one line per row, then '#'-prefixed summary lines when rows exist.
/// Doubles use the shortest representation that round-trips.
void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows,
                   const std::optional<MetricsSummary>& summary);
void emit_metrics(const std::string& path, const std::vector<MetricsRow>& rows,
                  const std::optional<MetricsSummary>& summary);
std::string format_row(const MetricsRow& row);

struct MetricsFile {
  std::vector<MetricsRow> rows;
  std::vector<std::string> summary_lines;
};
MetricsFile read_metrics(std::istream& in);
MetricsFile load_metrics(const std::string& path);

}  // namespace omtree
