#pragma once

#include "omtree/net_model.hpp"
#include "omtree/overlay.hpp"
#include "omtree/tensor.hpp"

#include <Eigen/Core>
#include <vector>

namespace omtree {

using ActionMask = std::vector<bool>;

struct DistanceMatrices {
  Eigen::MatrixXd ndm;   // destination-pair hops / (n_v - 1), zero diagonal
  Eigen::MatrixXd sndm;  // diagonal: source-to-destination hops / (n_v - 1)
};

DistanceMatrices build_distance_matrices(const Topology& topo, const MulticastRequest& req);

struct UpperStepOutcome {
  Tensor3 next_state;
  double reward = 0.0;
  bool done = false;
  ActionMask mask;
};

/// Destination-sequencing environment. State is 3 x n_vd x n_vd:
/// channel 0 NDM, 1 SNDM, 2 NSM (1 on the diagonal while unselected).
class UpperEnv {
 public:
  UpperEnv(const Topology& topo, MulticastRequest req);

  void reset();
  /// action is a destination index into request.destinations. The reward is
  /// the intermediate reward only; the sequence reward is added by the caller.
  UpperStepOutcome step(int action);

  const Tensor3& state() const { return state_; }
  const ActionMask& mask() const { return mask_; }
  bool done() const { return static_cast<int>(picked_.size()) == req_.destination_count(); }
  const MulticastRequest& request() const { return req_; }
  const DistanceMatrices& distances() const { return dist_; }
  /// Destination indices picked so far.
  const std::vector<int>& picked() const { return picked_; }
  Sequence sequence() const;
  int action_count() const { return req_.destination_count(); }

 private:
  MulticastRequest req_;
  DistanceMatrices dist_;
  Tensor3 state_;
  ActionMask mask_;
  std::vector<int> picked_;
};

/// Sum of per-destination feedback rewards.
double sequence_reward(const std::vector<double>& feedbacks, int destination_count);

}  // namespace omtree
