#pragma once

#include "omtree/env_lower.hpp"
#include "omtree/env_upper.hpp"
#include "omtree/metrics.hpp"
#include "omtree/net_model.hpp"
#include "omtree/overlay.hpp"
#include "omtree/ppo.hpp"
#include "omtree/sac.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace omtree {

struct TrainConfig {
  int episodes = 3000;
  std::string topology = "10NodeNet";  // named topology or file:PATH
  std::uint64_t seed = 7;
  MulticastRequest request{0, {3, 6, 9}};
  TrafficMode traffic = TrafficMode::Static;
  std::string out_dir = "run";
  int workers = 1;  // threads for lower dispatch
  int eval_interval = 10;
  int checkpoint_interval = 500;
  int dense_width = 128;  // lower networks
  PpoConfig ppo;
  SacConfig sac;
  LowerEnvConfig lower;

  void validate() const;
};

/// Named topologies are generated from seed; file:PATH is read as-is.
Topology resolve_topology(const std::string& name, std::uint64_t seed);

/// Per-destination sub-task: agent index is the destination's request index.
struct LowerTask {
  int agent = 0;
  std::vector<NodeId> candidates;  // S_k, source first
  NodeId destination = 0;
};

/// Sums over the updates run during one lower episode.
struct SacTally {
  int updates = 0;
  double critic_loss = 0.0;  // mean of both critics
  double policy_loss = 0.0;

  void add(const SacStats& s);
  void merge(const SacTally& o);
};

struct LowerRun {
  LowerEpisodeResult result;
  SacTally tally;
};

/// One lower episode. Training samples actions, stores transitions and runs
/// one update per step; evaluation acts greedily and leaves the agent untouched.
LowerRun run_lower_episode(SacAgent& agent, const Topology& snapshot, const ActionLayout& layout,
                           const LowerEnvConfig& cfg, const LowerTask& task, bool train);

/// Runs every task with its own agent and returns results in task order.
/// workers > 1 runs tasks on threads; the outcome is identical either way.
std::vector<LowerRun> dispatch_parallel(std::vector<SacAgent>& agents, const Topology& snapshot,
                                        const ActionLayout& layout, const LowerEnvConfig& cfg,
                                        const std::vector<LowerTask>& tasks, bool train, int workers);

using LowerExecutor = std::function<std::vector<LowerRun>(const std::vector<LowerTask>&)>;

struct EpisodeRecord {
  int episode = 0;
  Sequence sequence;
  std::vector<LowerTask> tasks;           // sequence order
  std::vector<LowerEpisodeResult> lower;  // sequence order
  std::vector<double> upper_rewards;      // intermediate rewards, R_Seq excluded
  double r_seq = 0.0;
  std::optional<OverlayTree> tree;
  double tree_cost = 0.0;  // NaN without a tree
  std::optional<TreeMetrics> metrics;
  SacTally tally;
  double wall_seconds = 0.0;

  bool success() const { return tree.has_value(); }
  int lower_steps() const;
};

/// Upper rollout, task split, lower dispatch, reward aggregation and tree
/// assembly. The tree is costed on cost_topo. traj receives the upper
/// trajectory with R_Seq added to the last reward.
EpisodeRecord run_episode(UpperEnv& env, PpoAgent& ppo, const LowerExecutor& lower, const Topology& cost_topo,
                          const CostWeights& w, const NormalizationSpec& spec, bool train,
                          Trajectory* traj = nullptr);

struct TrainResult {
  std::vector<MetricsRow> rows;
  std::optional<OverlayTree> best_tree;
  double best_cost = 0.0;
  int best_episode = -1;
};

/// Observer for each training episode and the snapshot it saw.
using EpisodeObserver = std::function<void(const EpisodeRecord&, const Topology& snapshot)>;

/// Full training run. Writes config.copy, metrics.csv, timing.csv,
/// checkpoints/agent-*.ckpt and best-tree.txt under out_dir; a PARTIAL file
/// marks a run cut short by an I/O failure.
TrainResult train(const TrainConfig& cfg, const EpisodeObserver& observer = {});

/// Loads the checkpoints of a finished run and plays one greedy episode.
EpisodeRecord evaluate_run(const TrainConfig& cfg);

std::string sequence_label(const Sequence& seq);

}  // namespace omtree
