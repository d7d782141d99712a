#pragma once

#include <string>

#include "weakseg/distribution.hpp"
#include "weakseg/kernel.hpp"

namespace weakseg {

enum class NeighborhoodMode {
  WeightedMean,             // m_i = (sum_{j!=i} k p_j) / (sum_{j!=i} k)
  ExponentiatedWeightedMean  // softmax_i(m_i), i.e. exp of the normalized-
                             // kernel average, renormalized per pixel
};

NeighborhoodMode parse_neighborhood_mode(const std::string& name);
std::string neighborhood_mode_name(NeighborhoodMode mode);

// Kernel-weighted average of the label field around each pixel (diagonal
// excluded). Errors if any pixel has zero total neighbor weight (e.g. a
// 1-pixel grid).
DistributionGrid weighted_mean(const DenseKernelFilter& filter,
                               const DistributionGrid& p);

// Per-pixel softmax of the weighted mean: sharpened consensus of the
// neighborhood under the normalized kernel.
DistributionGrid exponentiated_weighted_mean(const DenseKernelFilter& filter,
                                             const DistributionGrid& p);

DistributionGrid neighborhood_distribution(NeighborhoodMode mode,
                                           const DenseKernelFilter& filter,
                                           const DistributionGrid& p);

struct NeighborhoodLoss {
  double loss = 0.0;        // sum over pixels of KL(p_i || t_i)
  LogitGrid grad;           // d loss / d logits
  DistributionGrid target;  // t = the neighborhood distribution
};

// KL between the pixelwise prediction p = softmax(logits) and its
// neighborhood distribution t. With stop_gradient (default) t is treated as
// a constant; otherwise the gradient also flows through t via the kernel.
NeighborhoodLoss neighborhood_loss_and_grad(NeighborhoodMode mode,
                                            const DenseKernelFilter& filter,
                                            const LogitGrid& logits,
                                            bool stop_gradient = true);

// Convenience overloads that build a filter internally with the automatic
// backend choice (exact for <= 1024 pixels, lattice beyond).
DistributionGrid weighted_mean(const KernelParams& params,
                               const FeatureImage& feat,
                               const DistributionGrid& p);
DistributionGrid exponentiated_weighted_mean(const KernelParams& params,
                                             const FeatureImage& feat,
                                             const DistributionGrid& p);
NeighborhoodLoss neighborhood_loss_and_grad(NeighborhoodMode mode,
                                            const KernelParams& params,
                                            const FeatureImage& feat,
                                            const LogitGrid& logits,
                                            bool stop_gradient = true);

}  // namespace weakseg
