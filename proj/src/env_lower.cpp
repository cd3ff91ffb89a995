#include "omtree/env_lower.hpp"
#include "omtree/error.hpp"

#include <algorithm>
#include <cmath>

namespace omtree {

ActionLayout::ActionLayout(const Topology& topo, const std::vector<NodeId>& overlay_nodes) {
  std::vector<NodeId> overlay = overlay_nodes;
  std::sort(overlay.begin(), overlay.end());
  slots_.assign(topo.node_count(), {});
  for (NodeId v = 0; v < topo.node_count(); ++v) {
    auto& s = slots_[v];
    for (NodeId w : topo.neighbors(v)) s.push_back({SlotKind::Physical, w});
    if (std::binary_search(overlay.begin(), overlay.end(), v)) {
      for (NodeId w : overlay)
        if (w != v) s.push_back({SlotKind::Switch, w});
    }
    action_count_ = std::max(action_count_, static_cast<int>(s.size()));
  }
}

const ActionSlot* ActionLayout::slot(NodeId v, int action) const {
  const auto& s = slots_[v];
  if (action < 0 || action >= static_cast<int>(s.size())) return nullptr;
  return &s[action];
}

int LowerEnvConfig::resolved_failsteps(int node_count) const {
  if (failsteps > 0) return failsteps;
  return static_cast<int>(std::ceil(1.5 * node_count));
}

void LowerEnvConfig::validate(int node_count) const {
  if (resolved_failsteps(node_count) < 2) throw Error(ErrorCode::InvalidArgument, "failsteps must be >= 2");
  if (!(r_step < 0.0)) throw Error(ErrorCode::InvalidArgument, "r_step must be negative");
  weights.validate();
  norm.validate();
}

Eigen::MatrixXd build_loc(int node_count, NodeId now, NodeId target,
                          const std::vector<NodeId>& candidates) {
  if (std::find(candidates.begin(), candidates.end(), target) != candidates.end())
    throw Error(ErrorCode::InvalidTask, "target listed as a candidate source");
  Eigen::MatrixXd loc = Eigen::MatrixXd::Zero(node_count, node_count);
  for (NodeId c : candidates) loc(c, c) = -0.5;
  loc(target, target) = -1.0;
  loc(now, now) = 1.0;
  return loc;
}

LowerEnv::LowerEnv(const Topology& snapshot, const ActionLayout& layout, LowerEnvConfig cfg)
    : topo_(&snapshot),
      layout_(&layout),
      cfg_(cfg),
      failsteps_(cfg.resolved_failsteps(snapshot.node_count())) {
  cfg_.validate(snapshot.node_count());
  const int n = snapshot.node_count();
  state_ = Tensor3(4, n, n);
  for (int k = 0; k < snapshot.edge_count(); ++k) {
    const Edge& e = snapshot.edges()[k];
    const NormalizedTriple x = normalize_metrics(snapshot.links()[k], cfg_.norm);
    for (auto [i, j] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
      state_.at(0, i, j) = x.bw;
      state_.at(1, i, j) = x.delay;
      state_.at(2, i, j) = x.loss;
    }
  }
}

bool LowerEnv::is_candidate(NodeId v) const {
  return std::find(candidates_.begin(), candidates_.end(), v) != candidates_.end();
}

const Tensor3& LowerEnv::reset(const std::vector<NodeId>& candidates, NodeId destination) {
  const int n = topo_->node_count();
  if (candidates.empty()) throw Error(ErrorCode::InvalidTask, "empty candidate set");
  if (destination < 0 || destination >= n) throw Error(ErrorCode::InvalidTask, "destination out of range");
  for (NodeId c : candidates) {
    if (c < 0 || c >= n) throw Error(ErrorCode::InvalidTask, "candidate out of range");
    if (c == destination) throw Error(ErrorCode::InvalidTask, "destination is a candidate source");
  }
  candidates_ = candidates;
  destination_ = destination;
  position_ = candidates.front();
  visited_.assign(n, 0);
  visited_[position_] = 1;
  path_ = {position_};
  moved_ = done_ = success_ = false;
  steps_ = 0;
  refresh_loc();
  refresh_mask();
  return state_;
}

void LowerEnv::refresh_loc() {
  const int n = topo_->node_count();
  for (int i = 0; i < n; ++i) state_.at(3, i, i) = 0.0;
  const Eigen::MatrixXd loc = build_loc(n, position_, destination_, candidates_);
  for (int i = 0; i < n; ++i) state_.at(3, i, i) = loc(i, i);
}

void LowerEnv::refresh_mask() {
  mask_.assign(layout_->action_count(), false);
  if (done_) return;
  const bool at_candidate = !moved_ && is_candidate(position_);
  const auto& slots = layout_->slots(position_);
  for (std::size_t a = 0; a < slots.size(); ++a) {
    const ActionSlot& s = slots[a];
    if (s.kind == SlotKind::Physical) {
      mask_[a] = !visited_[s.node];
    } else {
      mask_[a] = at_candidate && s.node != position_ && is_candidate(s.node);
    }
  }
}

LowerStep LowerEnv::step(int action) {
  if (done_) throw Error(ErrorCode::InvalidAction, "episode already finished");
  const bool dead_end = std::none_of(mask_.begin(), mask_.end(), [](bool b) { return b; });
  double reward = 0.0;
  ++steps_;
  if (dead_end) {
    reward = cfg_.r_terminal_fail;
    done_ = true;
  } else {
    if (action < 0 || action >= static_cast<int>(mask_.size()) || !mask_[action])
      throw Error(ErrorCode::InvalidAction, "lower action " + std::to_string(action) + " is masked");
    const ActionSlot& s = *layout_->slot(position_, action);
    if (s.kind == SlotKind::Switch) {
      reward = cfg_.r_step;
      visited_.assign(visited_.size(), 0);
      position_ = s.node;
      visited_[position_] = 1;
      path_ = {position_};
    } else {
      const NormalizedTriple x = normalize_metrics(topo_->link(position_, s.node), cfg_.norm);
      reward = link_reward(x, cfg_.weights) + cfg_.r_step;
      position_ = s.node;
      visited_[position_] = 1;
      path_.push_back(position_);
      moved_ = true;
    }
    if (position_ == destination_) {
      reward += cfg_.r_terminal_success;
      done_ = success_ = true;
    }
  }
  if (!done_) {
    refresh_mask();
    const bool stuck = std::none_of(mask_.begin(), mask_.end(), [](bool b) { return b; });
    if (stuck || steps_ >= failsteps_) {
      reward += cfg_.r_terminal_fail;
      done_ = true;
    }
  }
  refresh_loc();
  if (done_) mask_.assign(layout_->action_count(), false);
  return LowerStep{state_, reward, done_, mask_};
}

LowerEpisodeResult LowerEnv::extract_result() const {
  LowerEpisodeResult r;
  r.chosen_source = path_.front();
  r.path = path_;
  r.success = success_;
  r.steps_used = steps_;
  r.feedback_reward = success_ ? path_link_reward(*topo_, path_, cfg_.weights, cfg_.norm)
                               : cfg_.r_terminal_fail;
  return r;
}

}  // namespace omtree
