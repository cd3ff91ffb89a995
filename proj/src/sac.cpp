#include "omtree/sac.hpp"
#include "omtree/error.hpp"

#include <algorithm>
#include <cmath>

namespace omtree {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t min_fill)
    : capacity_(capacity), min_fill_(min_fill) {
  if (capacity == 0) throw Error(ErrorCode::InvalidArgument, "replay capacity must be positive");
  if (min_fill > capacity) throw Error(ErrorCode::InvalidArgument, "min-fill exceeds capacity");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw Error(ErrorCode::InvalidArgument, "replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  if (!ready()) throw Error(ErrorCode::NotReady, "replay buffer below min-fill");
  if (batch > items_.size()) throw Error(ErrorCode::InvalidArgument, "batch larger than buffer");
  std::vector<std::size_t> out;
  out.reserve(batch);
  while (out.size() < batch) {
    const std::size_t i = rng.below(items_.size());
    if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
  }
  return out;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  std::vector<const Transition*> out;
  for (std::size_t i : sample_indices(batch, rng)) out.push_back(&at(i));
  return out;
}

void SacConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::InvalidArgument, "sac gamma must be in [0,1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "sac tau must be in (0,1]");
  if (!(initial_alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "sac alpha must be positive");
  if (!(target_entropy_scale >= 0.0 && target_entropy_scale <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "target entropy scale must be in [0,1]");
  if (batch_size == 0 || batch_size > min_fill)
    throw Error(ErrorCode::InvalidArgument, "sac batch size must be in [1, min_fill]");
  if (min_fill > capacity) throw Error(ErrorCode::InvalidArgument, "min-fill exceeds capacity");
  if (!(critic_lr > 0.0) || !(actor_lr > 0.0) || !(alpha_lr > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sac learning rates must be positive");
}

Eigen::VectorXd soft_target_values(const Eigen::MatrixXd& next_logits, const Eigen::MatrixXd& q1_next,
                                   const Eigen::MatrixXd& q2_next, const std::vector<double>& rewards,
                                   const std::vector<bool>& dones,
                                   const std::vector<ActionMask>& next_masks, double alpha, double gamma) {
  const Eigen::Index n = next_logits.cols();
  Eigen::VectorXd y(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    y[b] = rewards[b];
    if (dones[b] || legal_count(next_masks[b]) == 0) continue;
    const MaskedDistribution d = masked_softmax(next_logits.col(b), next_masks[b]);
    double v = 0.0;
    for (Eigen::Index a = 0; a < next_logits.rows(); ++a)
      if (next_masks[b][a])
        v += d.probs[a] * (std::min(q1_next(a, b), q2_next(a, b)) - alpha * d.log_probs[a]);
    y[b] += gamma * v;
  }
  return y;
}

double critic_loss(const Eigen::MatrixXd& q, const std::vector<int>& actions, const Eigen::VectorXd& y,
                   Eigen::MatrixXd* d_q) {
  const Eigen::Index n = q.cols();
  if (y.size() != n || static_cast<Eigen::Index>(actions.size()) != n)
    throw Error(ErrorCode::ShapeMismatch, "critic batch sizes differ");
  if (d_q) d_q->setZero(q.rows(), n);
  double total = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const double e = q(actions[b], b) - y[b];
    total += e * e;
    if (d_q) (*d_q)(actions[b], b) = e / static_cast<double>(n);
  }
  return 0.5 * total / static_cast<double>(n);
}

double policy_loss(const Eigen::MatrixXd& logits, const Eigen::MatrixXd& q1, const Eigen::MatrixXd& q2,
                   const std::vector<ActionMask>& masks, double alpha, Eigen::MatrixXd* d_logits,
                   std::vector<double>* entropies) {
  const Eigen::Index n = logits.cols();
  if (d_logits) d_logits->setZero(logits.rows(), n);
  if (entropies) entropies->assign(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const MaskedDistribution d = masked_softmax(logits.col(b), masks[b]);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(logits.rows());
    double mean_g = 0.0;
    for (Eigen::Index a = 0; a < logits.rows(); ++a) {
      if (!masks[b][a]) continue;
      g[a] = alpha * d.log_probs[a] - std::min(q1(a, b), q2(a, b));
      mean_g += d.probs[a] * g[a];
    }
    total += mean_g;
    if (entropies) (*entropies)[b] = d.entropy();
    if (d_logits)
      for (Eigen::Index a = 0; a < logits.rows(); ++a)
        if (masks[b][a]) (*d_logits)(a, b) = d.probs[a] * (g[a] - mean_g) / static_cast<double>(n);
  }
  return total / static_cast<double>(n);
}

double temperature_loss(double log_alpha, const std::vector<double>& entropies,
                        const std::vector<double>& targets, double* d_log_alpha) {
  if (entropies.size() != targets.size() || entropies.empty())
    throw Error(ErrorCode::ShapeMismatch, "temperature batch sizes differ");
  double gap = 0.0;
  for (std::size_t i = 0; i < entropies.size(); ++i) gap += entropies[i] - targets[i];
  gap /= static_cast<double>(entropies.size());
  const double alpha = std::exp(log_alpha);
  if (d_log_alpha) *d_log_alpha = alpha * gap;
  return alpha * gap;
}

ApproximatorSpec lower_network_spec(int node_count, int action_count, int dense_width) {
  ApproximatorSpec s;
  s.in_channels = 4;
  s.height = s.width = node_count;
  s.outputs = action_count;
  s.dense_width = dense_width;
  s.padding = Padding::Valid;
  return s;
}

SacAgent::SacAgent(const ApproximatorSpec& spec, SacConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      actor_(init_parameters(spec, derive_seed(seed, "sac-actor"))),
      q1_(init_parameters(spec, derive_seed(seed, "sac-critic", 1))),
      q2_(init_parameters(spec, derive_seed(seed, "sac-critic", 2))),
      q1_target_(q1_),
      q2_target_(q2_),
      actor_opt_(AdamState::for_params(actor_.values.size(), cfg.actor_lr)),
      q1_opt_(AdamState::for_params(q1_.values.size(), cfg.critic_lr)),
      q2_opt_(AdamState::for_params(q2_.values.size(), cfg.critic_lr)),
      alpha_opt_(AdamState::for_params(1, cfg.alpha_lr)),
      log_alpha_(Eigen::VectorXd::Constant(1, std::log(cfg.initial_alpha))),
      buffer_(cfg.capacity, cfg.min_fill),
      rng_(derive_seed(seed, "sac-sampling")) {
  cfg_.validate();
}

double SacAgent::alpha() const { return std::exp(log_alpha_[0]); }

MaskedDistribution SacAgent::policy(const Tensor3& state, const ActionMask& mask) const {
  return masked_softmax(forward(actor_, state.data).col(0), mask);
}

int SacAgent::act(const Tensor3& state, const ActionMask& mask) {
  return masked_sample(forward(actor_, state.data).col(0), mask, rng_).action;
}

int SacAgent::greedy(const Tensor3& state, const ActionMask& mask) const {
  return masked_argmax(forward(actor_, state.data).col(0), mask);
}

SacStats SacAgent::maybe_update() {
  if (!buffer_.ready()) return {};
  return update_step(buffer_.sample(cfg_.batch_size, rng_));
}

SacStats SacAgent::update_step(const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "empty sac batch");
  std::vector<const Tensor3*> states, next_states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<bool> dones;
  std::vector<ActionMask> masks, next_masks;
  for (const Transition* t : batch) {
    states.push_back(&t->state);
    next_states.push_back(&t->next_state);
    actions.push_back(t->action);
    rewards.push_back(t->reward);
    dones.push_back(t->done);
    masks.push_back(t->mask);
    next_masks.push_back(t->next_mask);
  }
  const Eigen::MatrixXd s = stack_states(states);
  const Eigen::MatrixXd s_next = stack_states(next_states);
  SacStats st;
  st.skipped = false;

  const double a0 = alpha();
  const Eigen::VectorXd y =
      soft_target_values(forward(actor_, s_next), forward(q1_target_, s_next), forward(q2_target_, s_next),
                         rewards, dones, next_masks, a0, cfg_.gamma);

  auto l1 = gradient(q1_, s, [&](const Eigen::MatrixXd& q, Eigen::MatrixXd& d) {
    return critic_loss(q, actions, y, &d);
  });
  auto l2 = gradient(q2_, s, [&](const Eigen::MatrixXd& q, Eigen::MatrixXd& d) {
    return critic_loss(q, actions, y, &d);
  });
  apply_update(q1_opt_, q1_.values, l1.gradient);
  apply_update(q2_opt_, q2_.values, l2.gradient);
  st.critic1_loss = l1.loss;
  st.critic2_loss = l2.loss;

  const Eigen::MatrixXd q1 = forward(q1_, s), q2 = forward(q2_, s);
  std::vector<double> entropies;
  auto lp = gradient(actor_, s, [&](const Eigen::MatrixXd& logits, Eigen::MatrixXd& d) {
    return policy_loss(logits, q1, q2, masks, a0, &d, &entropies);
  });
  apply_update(actor_opt_, actor_.values, lp.gradient);
  st.policy_loss = lp.loss;

  std::vector<double> targets;
  for (const auto& m : masks)
    targets.push_back(cfg_.target_entropy_scale * std::log(static_cast<double>(legal_count(m))));
  double d_log_alpha = 0.0;
  st.temperature_loss = temperature_loss(log_alpha_[0], entropies, targets, &d_log_alpha);
  apply_update(alpha_opt_, log_alpha_, Eigen::VectorXd::Constant(1, d_log_alpha));

  polyak_update(q1_target_.values, q1_.values, cfg_.tau);
  polyak_update(q2_target_.values, q2_.values, cfg_.tau);

  st.alpha = alpha();
  double h = 0.0;
  for (double e : entropies) h += e;
  st.entropy = h / static_cast<double>(entropies.size());
  return st;
}

void SacAgent::save(const std::string& path) const {
  std::vector<CheckpointRecord> recs;
  const std::uint64_t h = actor_.spec.hash();
  append_records(recs, "actor", actor_);
  append_records(recs, "actor", actor_opt_, h);
  append_records(recs, "critic1", q1_);
  append_records(recs, "critic1", q1_opt_, h);
  append_records(recs, "critic2", q2_);
  append_records(recs, "critic2", q2_opt_, h);
  append_records(recs, "target1", q1_target_);
  append_records(recs, "target2", q2_target_);
  recs.push_back({"log_alpha", h, log_alpha_});
  append_records(recs, "alpha", alpha_opt_, h);
  save_checkpoint(path, recs);
}

void SacAgent::load(const std::string& path) {
  const auto recs = load_checkpoint(path);
  const std::uint64_t h = actor_.spec.hash();
  ParameterSet a = actor_, c1 = q1_, c2 = q2_, t1 = q1_target_, t2 = q2_target_;
  AdamState ao = actor_opt_, o1 = q1_opt_, o2 = q2_opt_, alo = alpha_opt_;
  restore_records(recs, "actor", a);
  restore_records(recs, "actor", ao, h);
  restore_records(recs, "critic1", c1);
  restore_records(recs, "critic1", o1, h);
  restore_records(recs, "critic2", c2);
  restore_records(recs, "critic2", o2, h);
  restore_records(recs, "target1", t1);
  restore_records(recs, "target2", t2);
  const auto& la = find_record(recs, "log_alpha");
  if (la.spec_hash != h || la.values.size() != 1)
    throw Error(ErrorCode::VersionMismatch, "temperature record does not match");
  restore_records(recs, "alpha", alo, h);
  actor_ = std::move(a);
  q1_ = std::move(c1);
  q2_ = std::move(c2);
  q1_target_ = std::move(t1);
  q2_target_ = std::move(t2);
  actor_opt_ = std::move(ao);
  q1_opt_ = std::move(o1);
  q2_opt_ = std::move(o2);
  alpha_opt_ = std::move(alo);
  log_alpha_ = la.values;
}

}  // namespace omtree
