#pragma once

#include "omtree/cost.hpp"
#include "omtree/env_upper.hpp"
#include "omtree/net_model.hpp"
#include "omtree/overlay.hpp"
#include "omtree/tensor.hpp"

#include <vector>

namespace omtree {

enum class SlotKind { Physical, Switch };

struct ActionSlot {
  SlotKind kind = SlotKind::Physical;
  NodeId node = 0;
};

/// Per-node action slots: physical neighbors by id, then (overlay nodes only)
/// the other overlay nodes by id as switch targets. The action dimension is
/// the largest slot list.
class ActionLayout {
 public:
  ActionLayout() = default;
  ActionLayout(const Topology& topo, const std::vector<NodeId>& overlay_nodes);

  int action_count() const { return action_count_; }
  const std::vector<ActionSlot>& slots(NodeId v) const { return slots_[v]; }
  /// Slot, or nullptr when the index is past the node's list.
  const ActionSlot* slot(NodeId v, int action) const;

 private:
  std::vector<std::vector<ActionSlot>> slots_;
  int action_count_ = 0;
};

struct LowerEnvConfig {
  double r_step = -0.1;
  double r_terminal_success = 10.0;
  double r_terminal_fail = -10.0;
  int failsteps = 0;  // 0: ceil(1.5 n_v)
  CostWeights weights;
  NormalizationSpec norm;

  int resolved_failsteps(int node_count) const;
  void validate(int node_count) const;
};

/// LOC diagonal: 1 at now, -1 at target, -0.5 at candidates; now > target > candidate.
Eigen::MatrixXd build_loc(int node_count, NodeId now, NodeId target,
                          const std::vector<NodeId>& candidates);

struct LowerStep {
  Tensor3 next_state;
  double reward = 0.0;
  bool done = false;
  ActionMask mask;
};

struct LowerEpisodeResult {
  NodeId chosen_source = 0;
  Path path;
  double feedback_reward = 0.0;
  bool success = false;
  int steps_used = 0;
};

/// Routing environment for one destination. State is 4 x n_v x n_v: the
/// normalized bandwidth/delay/loss adjacency matrices and LOC.
class LowerEnv {
 public:
  LowerEnv(const Topology& snapshot, const ActionLayout& layout, LowerEnvConfig cfg);

  /// candidates[0] must be the source; the agent starts there.
  const Tensor3& reset(const std::vector<NodeId>& candidates, NodeId destination);
  LowerStep step(int action);

  const Tensor3& state() const { return state_; }
  const ActionMask& mask() const { return mask_; }
  bool done() const { return done_; }
  bool success() const { return success_; }
  NodeId position() const { return position_; }
  bool moved() const { return moved_; }
  const std::vector<char>& visited() const { return visited_; }
  const std::vector<NodeId>& candidates() const { return candidates_; }
  NodeId destination() const { return destination_; }
  int steps() const { return steps_; }
  int failsteps() const { return failsteps_; }
  const Path& path() const { return path_; }
  const ActionLayout& layout() const { return *layout_; }
  const Topology& snapshot() const { return *topo_; }
  const LowerEnvConfig& config() const { return cfg_; }
  bool is_candidate(NodeId v) const;

  LowerEpisodeResult extract_result() const;

 private:
  void refresh_mask();
  void refresh_loc();

  const Topology* topo_;
  const ActionLayout* layout_;
  LowerEnvConfig cfg_;
  int failsteps_;
  Tensor3 state_;
  ActionMask mask_;
  std::vector<NodeId> candidates_;
  NodeId destination_ = 0;
  NodeId position_ = 0;
  std::vector<char> visited_;
  Path path_;
  bool moved_ = false;
  bool done_ = false;
  bool success_ = false;
  int steps_ = 0;
};

}  // namespace omtree
