#pragma once

#include "omtree/env_upper.hpp"
#include "omtree/rng.hpp"
#include "omtree/tensor.hpp"

#include <Eigen/Core>
#include <vector>

namespace omtree {

/// Softmax renormalized over the legal slots. Masked slots get probability 0
/// and log-probability 0, so p * log p terms vanish without special cases.
struct MaskedDistribution {
  Eigen::VectorXd probs;
  Eigen::VectorXd log_probs;

  double entropy() const;
};

MaskedDistribution masked_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits,
                                  const ActionMask& mask);

struct SampledAction {
  int action = 0;
  double log_prob = 0.0;
};

/// Throws InvalidAction when no slot is legal.
SampledAction masked_sample(const Eigen::Ref<const Eigen::VectorXd>& logits,
                            const ActionMask& mask, Rng& rng);
/// Most probable legal slot; ties go to the lowest index.
int masked_argmax(const Eigen::Ref<const Eigen::VectorXd>& logits, const ActionMask& mask);

int legal_count(const ActionMask& mask);

/// One flattened state per column.
Eigen::MatrixXd stack_states(const std::vector<const Tensor3*>& states);

}  // namespace omtree
