#pragma once

#include <span>

#include "weakseg/grid.hpp"

namespace weakseg {

// Probability floor applied before any logarithm: entries are clamped to
// [kProbFloor, 1] and each pixel renormalized. A no-op (up to one division
// by a sum that is already 1) for healthy distributions.
inline constexpr double kProbFloor = 1e-12;

// Per-pixel softmax, stabilized by subtracting the per-pixel max logit.
DistributionGrid softmax_grid(const LogitGrid& logits);

// Clamp every entry to [kProbFloor, 1] and renormalize each pixel.
DistributionGrid floored(const DistributionGrid& p);

// Sum over pixels of KL(p_i || q_i), both sides floored. Nonnegative;
// exactly zero when p and q are identical.
double kl_divergence(const DistributionGrid& p, const DistributionGrid& q);

// Shannon entropy in nats of a weight vector on the simplex, with the
// 0 * log 0 = 0 convention. Negative weights are an error.
double entropy(std::span<const double> weights);

}  // namespace weakseg
