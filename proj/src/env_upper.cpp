#include "omtree/env_upper.hpp"
#include "omtree/error.hpp"

#include <numeric>

namespace omtree {

DistanceMatrices build_distance_matrices(const Topology& topo, const MulticastRequest& req) {
  const int m = req.destination_count();
  const double scale = topo.node_count() > 1 ? 1.0 / (topo.node_count() - 1) : 1.0;
  DistanceMatrices d{Eigen::MatrixXd::Zero(m, m), Eigen::MatrixXd::Zero(m, m)};
  const auto from_source = bfs_hops(topo, req.source);
  for (int i = 0; i < m; ++i) {
    const auto hops = bfs_hops(topo, req.destinations[i]);
    for (int j = 0; j < m; ++j) {
      const int h = hops[req.destinations[j]];
      if (h < 0) throw Error(ErrorCode::DisconnectedGraph, "destinations are not mutually reachable");
      d.ndm(i, j) = h * scale;
    }
    const int hs = from_source[req.destinations[i]];
    if (hs < 0) throw Error(ErrorCode::DisconnectedGraph, "destination unreachable from source");
    d.sndm(i, i) = hs * scale;
  }
  return d;
}

UpperEnv::UpperEnv(const Topology& topo, MulticastRequest req)
    : req_(std::move(req)), dist_(build_distance_matrices(topo, req_)) {
  req_.validate(topo.node_count());
  reset();
}

void UpperEnv::reset() {
  const int m = req_.destination_count();
  state_ = Tensor3(3, m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      state_.at(0, i, j) = dist_.ndm(i, j);
      state_.at(1, i, j) = dist_.sndm(i, j);
    }
    state_.at(2, i, i) = 1.0;
  }
  mask_.assign(m, true);
  picked_.clear();
}

UpperStepOutcome UpperEnv::step(int action) {
  if (action < 0 || action >= action_count() || !mask_[action])
    throw Error(ErrorCode::InvalidAction, "upper action " + std::to_string(action) + " is masked");
  const double reward =
      picked_.empty() ? -dist_.sndm(action, action) : -dist_.ndm(picked_.back(), action);
  picked_.push_back(action);
  mask_[action] = false;
  state_.at(2, action, action) = 0.0;
  return UpperStepOutcome{state_, reward, done(), mask_};
}

Sequence UpperEnv::sequence() const {
  Sequence s;
  for (int i : picked_) s.order.push_back(req_.destinations[i]);
  return s;
}

double sequence_reward(const std::vector<double>& feedbacks, int destination_count) {
  if (static_cast<int>(feedbacks.size()) != destination_count)
    throw Error(ErrorCode::CountMismatch, "one feedback reward per destination required");
  return std::accumulate(feedbacks.begin(), feedbacks.end(), 0.0);
}

}  // namespace omtree
