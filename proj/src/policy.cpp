#include "omtree/policy.hpp"
#include "omtree/error.hpp"

#include <cmath>
#include <limits>

namespace omtree {

double MaskedDistribution::entropy() const { return -probs.dot(log_probs); }

int legal_count(const ActionMask& mask) {
  int n = 0;
  for (bool b : mask) n += b ? 1 : 0;
  return n;
}

MaskedDistribution masked_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits,
                                  const ActionMask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != logits.size())
    throw Error(ErrorCode::ShapeMismatch, "mask and logits differ in length");
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask[i]) top = std::max(top, logits[i]);
  if (top == -std::numeric_limits<double>::infinity())
    throw Error(ErrorCode::InvalidAction, "no legal action in mask");
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask[i] && !std::isfinite(logits[i])) throw Error(ErrorCode::NonFinite, "non-finite logit");
  MaskedDistribution d{Eigen::VectorXd::Zero(logits.size()), Eigen::VectorXd::Zero(logits.size())};
  double z = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask[i]) z += std::exp(logits[i] - top);
  const double log_z = std::log(z);
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    d.log_probs[i] = logits[i] - top - log_z;
    d.probs[i] = std::exp(d.log_probs[i]);
  }
  return d;
}

SampledAction masked_sample(const Eigen::Ref<const Eigen::VectorXd>& logits,
                            const ActionMask& mask, Rng& rng) {
  const MaskedDistribution d = masked_softmax(logits, mask);
  const double u = rng.uniform();
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    last = static_cast<int>(i);
    acc += d.probs[i];
    if (u < acc) return {last, d.log_probs[i]};
  }
  return {last, d.log_probs[last]};
}

int masked_argmax(const Eigen::Ref<const Eigen::VectorXd>& logits, const ActionMask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != logits.size())
    throw Error(ErrorCode::ShapeMismatch, "mask and logits differ in length");
  int best = -1;
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    if (mask[i] && (best < 0 || logits[i] > logits[best])) best = static_cast<int>(i);
  if (best < 0) throw Error(ErrorCode::InvalidAction, "no legal action in mask");
  return best;
}

Eigen::MatrixXd stack_states(const std::vector<const Tensor3*>& states) {
  if (states.empty()) return {};
  const Eigen::Index rows = states.front()->data.size();
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i]->data.size() != rows) throw Error(ErrorCode::ShapeMismatch, "ragged state batch");
    m.col(static_cast<Eigen::Index>(i)) = states[i]->data;
  }
  return m;
}

}  // namespace omtree
