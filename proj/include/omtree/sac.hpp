#pragma once

#include "omtree/approximator.hpp"
#include "omtree/env_upper.hpp"
#include "omtree/policy.hpp"
#include "omtree/rng.hpp"
#include "omtree/tensor.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace omtree {

struct Transition {
  Tensor3 state;
  int action = 0;
  double reward = 0.0;
  Tensor3 next_state;
  bool done = false;
  ActionMask mask;       // legal actions at state
  ActionMask next_mask;  // legal actions at next_state
};

/// Bounded FIFO replay memory.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t min_fill);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t min_fill() const { return min_fill_; }
  bool ready() const { return items_.size() >= min_fill_; }
  /// i = 0 is the oldest entry.
  const Transition& at(std::size_t i) const;

  /// Distinct indices drawn uniformly; throws NotReady below min-fill.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_, min_fill_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // oldest entry once full
};

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double initial_alpha = 0.2;
  double target_entropy_scale = 0.6;  // H_target = scale * log(#legal)
  std::size_t batch_size = 128;
  std::size_t capacity = 100000;
  std::size_t min_fill = 1000;
  double critic_lr = 7e-4;
  double actor_lr = 1e-4;
  double alpha_lr = 3e-4;

  void validate() const;
};

/// Output-space pieces of the update, exposed for testing. All matrices are
/// actions x batch.

/// y = r + gamma (1 - done) sum_a pi(a|s')(min(Q1', Q2')(s', a) - alpha log pi(a|s')).
Eigen::VectorXd soft_target_values(const Eigen::MatrixXd& next_logits, const Eigen::MatrixXd& q1_next,
                                   const Eigen::MatrixXd& q2_next, const std::vector<double>& rewards,
                                   const std::vector<bool>& dones,
                                   const std::vector<ActionMask>& next_masks, double alpha, double gamma);
/// 0.5 mean((Q(s, a) - y)^2).
double critic_loss(const Eigen::MatrixXd& q, const std::vector<int>& actions, const Eigen::VectorXd& y,
                   Eigen::MatrixXd* d_q = nullptr);
/// mean_s sum_a pi(a|s)(alpha log pi(a|s) - min(Q1, Q2)(s, a)). entropies
/// receives the per-state entropy of the masked policy.
double policy_loss(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2,
                   const std::vector<ActionMask>& masks, double alpha, Eigen::MatrixXd* d_logits = nullptr,
                   std::vector<double>* entropies = nullptr);
/// mean(alpha (H - H_target)) with alpha = exp(log_alpha).
double temperature_loss(double log_alpha, const std::vector<double>& entropies,
                        const std::vector<double>& targets, double* d_log_alpha = nullptr);

struct SacStats {
  bool skipped = true;
  double critic1_loss = 0.0, critic2_loss = 0.0;
  double policy_loss = 0.0;
  double temperature_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
};

ApproximatorSpec lower_network_spec(int node_count, int action_count, int dense_width = 128);

/// Discrete soft actor-critic with twin critics, target copies and a
/// learned temperature. Owns its replay buffer and random stream.
class SacAgent {
 public:
  SacAgent(const ApproximatorSpec& spec, SacConfig cfg, std::uint64_t seed);

  int act(const Tensor3& state, const ActionMask& mask);
  int greedy(const Tensor3& state, const ActionMask& mask) const;
  MaskedDistribution policy(const Tensor3& state, const ActionMask& mask) const;

  void observe(Transition t) { buffer_.push(std::move(t)); }
  /// One update from a fresh batch, or skipped while the buffer is below min-fill.
  SacStats maybe_update();
  SacStats update_step(const std::vector<const Transition*>& batch);

  double alpha() const;
  double log_alpha() const { return log_alpha_[0]; }
  const SacConfig& config() const { return cfg_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const ParameterSet& actor() const { return actor_; }
  const ParameterSet& critic(int i) const { return i == 0 ? q1_ : q2_; }
  const ParameterSet& target(int i) const { return i == 0 ? q1_target_ : q2_target_; }
  ParameterSet& actor() { return actor_; }
  ParameterSet& critic(int i) { return i == 0 ? q1_ : q2_; }
  ParameterSet& target(int i) { return i == 0 ? q1_target_ : q2_target_; }

  /// Parameters, targets, optimizer moments and temperature; not the buffer.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  SacConfig cfg_;
  ParameterSet actor_, q1_, q2_, q1_target_, q2_target_;
  AdamState actor_opt_, q1_opt_, q2_opt_, alpha_opt_;
  Eigen::VectorXd log_alpha_;
  ReplayBuffer buffer_;
  Rng rng_;
};

}  // namespace omtree
