#pragma once

#include "omtree/approximator.hpp"
#include "omtree/env_upper.hpp"
#include "omtree/policy.hpp"
#include "omtree/rng.hpp"
#include "omtree/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace omtree {

struct UpperTransition {
  Tensor3 state;
  int action = 0;
  double reward = 0.0;
  Tensor3 next_state;
  bool done = false;
  ActionMask mask;
  double log_prob = 0.0;
  double value = 0.0;
};

/// One upper episode; exactly one done flag, on the last record.
struct Trajectory {
  std::vector<UpperTransition> steps;
  void validate() const;
};

struct PpoConfig {
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  int epochs = 4;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  bool normalize_advantages = true;

  void validate() const;
};

/// values[t] = V(s_t); bootstrap = V(s_T) for a truncated tail (ignored after done).
Eigen::VectorXd gae(const std::vector<double>& rewards, const std::vector<double>& values,
                    const std::vector<bool>& dones, double bootstrap, double gamma, double lambda);
Eigen::VectorXd gae(const Trajectory& traj, double gamma, double lambda);

/// Zero mean, unit std; batches of one are only centered.
Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& a);

/// Minibatch view consumed by the losses.
struct PolicyBatch {
  Eigen::MatrixXd states;  // input_size x B
  std::vector<int> actions;
  std::vector<ActionMask> masks;
};

/// log pi(a_b | s_b) for every column.
Eigen::VectorXd log_probs_of(const ParameterSet& actor, const PolicyBatch& batch);

/// -mean(min(r A, clip(r, 1-eps, 1+eps) A)) from logits (A x B). Fills
/// d_logits when given. mean_ratio receives mean r.
double surrogate_loss(const Eigen::MatrixXd& logits, const PolicyBatch& batch,
                      const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages,
                      double clip, Eigen::MatrixXd* d_logits = nullptr,
                      double* mean_ratio = nullptr);
/// mean((v - target)^2) from values (1 x B).
double value_loss(const Eigen::MatrixXd& values, const Eigen::VectorXd& targets,
                  Eigen::MatrixXd* d_values = nullptr);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 1.0;
  int epochs = 0;
};

/// Upper sequencing agent: separate actor (logits over destinations) and critic.
class PpoAgent {
 public:
  PpoAgent(int destination_count, PpoConfig cfg, std::uint64_t seed);

  struct Decision {
    int action = 0;
    double log_prob = 0.0;
    double value = 0.0;
  };
  Decision act(const Tensor3& state, const ActionMask& mask);
  int greedy(const Tensor3& state, const ActionMask& mask) const;
  double value(const Tensor3& state) const;
  Eigen::VectorXd logits(const Tensor3& state) const;

  PpoStats update(const Trajectory& traj);

  const PpoConfig& config() const { return cfg_; }
  const ParameterSet& actor() const { return actor_; }
  const ParameterSet& critic() const { return critic_; }
  ParameterSet& actor() { return actor_; }
  ParameterSet& critic() { return critic_; }

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  PpoConfig cfg_;
  ParameterSet actor_, critic_;
  AdamState actor_opt_, critic_opt_;
  Rng rng_;
};

ApproximatorSpec upper_network_spec(int destination_count, int outputs);

}  // namespace omtree
