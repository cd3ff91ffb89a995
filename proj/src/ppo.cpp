#include "omtree/ppo.hpp"
#include "omtree/error.hpp"

#include <algorithm>
#include <cmath>

namespace omtree {

void Trajectory::validate() const {
  if (steps.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  for (std::size_t t = 0; t < steps.size(); ++t)
    if (steps[t].done != (t + 1 == steps.size()))
      throw Error(ErrorCode::InvalidArgument, "trajectory must end with its only done flag");
}

void PpoConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw Error(ErrorCode::InvalidArgument, "ppo clip must be in (0,1)");
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "ppo gamma and lambda must be in [0,1]");
  if (epochs < 0) throw Error(ErrorCode::InvalidArgument, "ppo epochs must be >= 0");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw Error(ErrorCode::InvalidArgument, "ppo learning rates must be positive");
}

Eigen::VectorXd gae(const std::vector<double>& rewards, const std::vector<double>& values,
                    const std::vector<bool>& dones, double bootstrap, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "gae inputs differ in length");
  Eigen::VectorXd adv(static_cast<Eigen::Index>(n));
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_v = k + 1 < n ? values[k + 1] : bootstrap;
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_v * live - values[k];
    running = delta + gamma * lambda * live * running;
    adv[static_cast<Eigen::Index>(k)] = running;
  }
  return adv;
}

Eigen::VectorXd gae(const Trajectory& traj, double gamma, double lambda) {
  std::vector<double> r, v;
  std::vector<bool> d;
  for (const auto& s : traj.steps) {
    r.push_back(s.reward);
    v.push_back(s.value);
    d.push_back(s.done);
  }
  return gae(r, v, d, 0.0, gamma, lambda);
}

Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& a) {
  if (a.size() == 0) return a;
  const double mean = a.mean();
  Eigen::VectorXd c = a.array() - mean;
  if (a.size() < 2) return c;
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(a.size()));
  return c / (sd + 1e-8);
}

Eigen::VectorXd log_probs_of(const ParameterSet& actor, const PolicyBatch& batch) {
  const Eigen::MatrixXd logits = forward(actor, batch.states);
  Eigen::VectorXd out(logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b)
    out[b] = masked_softmax(logits.col(b), batch.masks[b]).log_probs[batch.actions[b]];
  return out;
}

double surrogate_loss(const Eigen::MatrixXd& logits, const PolicyBatch& batch,
                      const Eigen::VectorXd& old_log_probs, const Eigen::VectorXd& advantages,
                      double clip, Eigen::MatrixXd* d_logits, double* mean_ratio) {
  const Eigen::Index n = logits.cols();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty batch");
  if (old_log_probs.size() != n || advantages.size() != n ||
      static_cast<Eigen::Index>(batch.actions.size()) != n)
    throw Error(ErrorCode::ShapeMismatch, "surrogate batch sizes differ");
  if (d_logits) d_logits->setZero(logits.rows(), n);
  double total = 0.0, ratio_sum = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const MaskedDistribution d = masked_softmax(logits.col(b), batch.masks[b]);
    const int a = batch.actions[b];
    if (!batch.masks[b][a]) throw Error(ErrorCode::InvalidAction, "batch action is masked");
    const double r = std::exp(d.log_probs[a] - old_log_probs[b]);
    if (!std::isfinite(r)) throw Error(ErrorCode::NonFinite, "non-finite probability ratio");
    ratio_sum += r;
    const double adv = advantages[b];
    const double unclipped = r * adv;
    const double clipped = std::clamp(r, 1.0 - clip, 1.0 + clip) * adv;
    const bool use_unclipped = unclipped <= clipped;
    total += use_unclipped ? unclipped : clipped;
    if (d_logits && use_unclipped) {
      // d(r A)/d logit_j = r A (1[j=a] - pi_j), loss is the negated mean.
      const double scale = -unclipped / static_cast<double>(n);
      for (Eigen::Index j = 0; j < logits.rows(); ++j)
        if (batch.masks[b][j]) (*d_logits)(j, b) = scale * ((j == a ? 1.0 : 0.0) - d.probs[j]);
    }
  }
  if (mean_ratio) *mean_ratio = ratio_sum / static_cast<double>(n);
  return -total / static_cast<double>(n);
}

double value_loss(const Eigen::MatrixXd& values, const Eigen::VectorXd& targets,
                  Eigen::MatrixXd* d_values) {
  if (values.rows() != 1 || values.cols() != targets.size())
    throw Error(ErrorCode::ShapeMismatch, "value batch shape mismatch");
  const Eigen::RowVectorXd err = values.row(0) - targets.transpose();
  const double n = static_cast<double>(targets.size());
  if (d_values) *d_values = (2.0 / n) * err;
  return err.squaredNorm() / n;
}

ApproximatorSpec upper_network_spec(int destination_count, int outputs) {
  ApproximatorSpec s;
  s.in_channels = 3;
  s.height = s.width = destination_count;
  s.outputs = outputs;
  s.padding = Padding::Same;
  return s;
}

PpoAgent::PpoAgent(int destination_count, PpoConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      actor_(init_parameters(upper_network_spec(destination_count, destination_count),
                             derive_seed(seed, "ppo-actor"))),
      critic_(init_parameters(upper_network_spec(destination_count, 1), derive_seed(seed, "ppo-critic"))),
      actor_opt_(AdamState::for_params(actor_.values.size(), cfg.actor_lr)),
      critic_opt_(AdamState::for_params(critic_.values.size(), cfg.critic_lr)),
      rng_(derive_seed(seed, "ppo-sampling")) {
  cfg_.validate();
}

Eigen::VectorXd PpoAgent::logits(const Tensor3& state) const {
  return forward(actor_, state.data).col(0);
}

double PpoAgent::value(const Tensor3& state) const { return forward(critic_, state.data)(0, 0); }

PpoAgent::Decision PpoAgent::act(const Tensor3& state, const ActionMask& mask) {
  const SampledAction s = masked_sample(logits(state), mask, rng_);
  return {s.action, s.log_prob, value(state)};
}

int PpoAgent::greedy(const Tensor3& state, const ActionMask& mask) const {
  return masked_argmax(logits(state), mask);
}

PpoStats PpoAgent::update(const Trajectory& traj) {
  traj.validate();
  PpoStats stats;
  const Eigen::VectorXd adv_raw = gae(traj, cfg_.gamma, cfg_.lambda);
  PolicyBatch batch;
  std::vector<const Tensor3*> states;
  Eigen::VectorXd old_lp(adv_raw.size()), targets(adv_raw.size());
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& s = traj.steps[t];
    states.push_back(&s.state);
    batch.actions.push_back(s.action);
    batch.masks.push_back(s.mask);
    old_lp[static_cast<Eigen::Index>(t)] = s.log_prob;
    targets[static_cast<Eigen::Index>(t)] = adv_raw[static_cast<Eigen::Index>(t)] + s.value;
  }
  batch.states = stack_states(states);
  const Eigen::VectorXd adv = cfg_.normalize_advantages ? normalize_advantages(adv_raw) : adv_raw;

  for (int e = 0; e < cfg_.epochs; ++e) {
    double ratio = 1.0;
    auto pl = gradient(actor_, batch.states, [&](const Eigen::MatrixXd& out, Eigen::MatrixXd& d) {
      return surrogate_loss(out, batch, old_lp, adv, cfg_.clip, &d, &ratio);
    });
    auto vl = gradient(critic_, batch.states, [&](const Eigen::MatrixXd& out, Eigen::MatrixXd& d) {
      return value_loss(out, targets, &d);
    });
    apply_update(actor_opt_, actor_.values, pl.gradient);
    apply_update(critic_opt_, critic_.values, vl.gradient);
    stats.policy_loss = pl.loss;
    stats.value_loss = vl.loss;
    stats.mean_ratio = ratio;
    ++stats.epochs;
  }
  const Eigen::MatrixXd logits_now = forward(actor_, batch.states);
  double h = 0.0;
  for (Eigen::Index b = 0; b < logits_now.cols(); ++b)
    h += masked_softmax(logits_now.col(b), batch.masks[b]).entropy();
  stats.entropy = h / static_cast<double>(logits_now.cols());
  return stats;
}

void PpoAgent::save(const std::string& path) const {
  std::vector<CheckpointRecord> recs;
  append_records(recs, "actor", actor_);
  append_records(recs, "actor", actor_opt_, actor_.spec.hash());
  append_records(recs, "critic", critic_);
  append_records(recs, "critic", critic_opt_, critic_.spec.hash());
  save_checkpoint(path, recs);
}

void PpoAgent::load(const std::string& path) {
  const auto recs = load_checkpoint(path);
  ParameterSet a = actor_, c = critic_;
  AdamState ao = actor_opt_, co = critic_opt_;
  restore_records(recs, "actor", a);
  restore_records(recs, "actor", ao, a.spec.hash());
  restore_records(recs, "critic", c);
  restore_records(recs, "critic", co, c.spec.hash());
  actor_ = std::move(a);
  critic_ = std::move(c);
  actor_opt_ = std::move(ao);
  critic_opt_ = std::move(co);
}

}  // namespace omtree
