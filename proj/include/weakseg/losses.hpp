#pragma once

#include "weakseg/neighborhood.hpp"
#include "weakseg/prior.hpp"

namespace weakseg {

struct LossConfig {
  double lambda = 0.3;  // weight of the neighborhood term
  NeighborhoodMode mode = NeighborhoodMode::ExponentiatedWeightedMean;
  bool normalize_per_pixel = false;  // divide losses (and grads) by pixels
  bool use_prior = true;       // false: replace the constrained prior by its
                               // loss-minimizing degenerate vertex (every
                               // pixel self-labeled with one class) —
                               // negative control for collapse experiments
  bool stop_gradient = true;   // false: backprop through neighborhood target
};

struct ClassificationLoss {
  double loss = 0.0;
  LogitGrid grad;
};

// Cross-entropy between the auxiliary target q_aux (treated as a constant)
// and p = softmax(logits): -sum_i sum_l q_aux_i(l) log p_i(l).
// Gradient per pixel: p - q_aux.
ClassificationLoss classification_loss_and_grad(const LogitGrid& logits,
                                                const DistributionGrid& q_aux);

struct LossReport {
  double class_loss = 0.0;
  double neighb_loss = 0.0;
  double total = 0.0;  // class_loss + lambda * neighb_loss
  LogitGrid grad;      // d total / d logits
  DistributionGrid aux;
  PriorSolution prior;
  int pixel_count = 0;
};

// Full training signal for one image: solve the entropy prior on
// p = softmax(logits), apply it to get q_aux, then
// total = CE(q_aux, p) + lambda * KL(p || neighborhood(p)).
// lambda == 0 skips the neighborhood term entirely, so the gradient equals
// the classification gradient exactly.
LossReport total_loss_and_grad(const LossConfig& config,
                               const DenseKernelFilter& filter,
                               const LogitGrid& logits, const LabelSet& labels,
                               const PriorConstraints& constraints,
                               int prior_grid_size = 1001);

// Convenience overload that builds the filter internally (automatic backend).
LossReport total_loss_and_grad(const LossConfig& config,
                               const KernelParams& params,
                               const FeatureImage& feat,
                               const LogitGrid& logits, const LabelSet& labels,
                               const PriorConstraints& constraints,
                               int prior_grid_size = 1001);

}  // namespace weakseg
