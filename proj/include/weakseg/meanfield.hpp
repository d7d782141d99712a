#pragma once

#include <span>

#include "weakseg/distribution.hpp"
#include "weakseg/kernel.hpp"

namespace weakseg {

// Two equivalent ways to write the pairwise potential:
//   AgreeReward:   phi_ij(z_i, z_j) = -k(i,j) * 1[z_i == z_j]
//   PottsDisagree: phi_ij(z_i, z_j) = +k(i,j) * 1[z_i != z_j]
// They differ by a constant per pair, so mean-field updates coincide for a
// common kernel.
enum class PotentialForm { AgreeReward, PottsDisagree };

// Pairwise CRF over the pixel grid. Energy convention:
//   E(z) = sum_i unary_i(z_i) + sum_{i<j} phi_ij(z_i, z_j)
// (each unordered pair counted once), p(z) ∝ exp(-E(z)). A zero unary with
// AgreeReward is the label-field prior whose mean-field fixed points satisfy
// q_i(l) ∝ exp(sum_{j != i} k(i,j) q_j(l)).
struct PairwiseCrf {
  LogitGrid unary;  // unary potentials in nats (costs, not scores)
  KernelParams kernel;
  FeatureImage feat;
  PotentialForm form = PotentialForm::AgreeReward;
  // Use the per-pixel normalized kernel k(i,j) / sum_{j' != i} k(i,j')
  // in place of k. Changes the update (row sums vary per pixel); only
  // supported for mean-field, not exact enumeration (the normalized kernel
  // is not symmetric, so no joint distribution corresponds to it).
  bool normalize_kernel = false;
};

class MeanFieldEngine {
 public:
  MeanFieldEngine(const PairwiseCrf& crf, DenseKernelFilter::Backend backend);
  explicit MeanFieldEngine(const PairwiseCrf& crf);  // automatic backend

  // One parallel mean-field update of all pixels.
  DistributionGrid step(const DistributionGrid& q) const;

  // Undamped substitution residual max_i,l |step(q) - q|.
  double step_residual(const DistributionGrid& q) const;

  struct FixedPoint {
    DistributionGrid q;
    int iterations = 0;
    double residual = 0.0;  // undamped residual at the returned q
  };

  // Damped fixed-point iteration q <- damping * step(q) + (1-damping) * q,
  // stopping when the undamped residual drops below tol or after max_iters.
  FixedPoint fixed_point(const DistributionGrid& init, int max_iters,
                         double tol, double damping = 0.5) const;

  const PairwiseCrf& crf() const { return crf_; }
  const DenseKernelFilter& filter() const { return filter_; }

 private:
  PairwiseCrf crf_;
  DenseKernelFilter filter_;
};

DistributionGrid meanfield_step(const PairwiseCrf& crf,
                                const DistributionGrid& q);
MeanFieldEngine::FixedPoint meanfield_fixed_point(const PairwiseCrf& crf,
                                                  const DistributionGrid& init,
                                                  int max_iters, double tol,
                                                  double damping = 0.5);

// Exact joint distribution by enumerating all label fields. Guarded to
// num_classes^pixels <= 2^20 states; raw kernel only.
class ExactCrfDistribution {
 public:
  explicit ExactCrfDistribution(const PairwiseCrf& crf);

  int pixels() const { return pixels_; }
  int num_classes() const { return num_classes_; }
  double log_partition() const { return log_partition_; }

  // Joint log-probability / probability of one complete labeling.
  double log_prob(std::span<const int> labeling) const;
  double prob(std::span<const int> labeling) const;

  DistributionGrid marginals() const;

  // KL(Q || p_exact) for a factorized Q given per pixel.
  double kl_from_factorized(const DistributionGrid& q) const;

 private:
  size_t flat_index(std::span<const int> labeling) const;

  int pixels_ = 0;
  int num_classes_ = 0;
  int height_ = 0;
  int width_ = 0;
  double log_partition_ = 0.0;
  std::vector<double> log_prob_;  // indexed by flat labeling
};

struct EquivalenceReport {
  // AgreeReward vs PottsDisagree updates, shared normalized kernel.
  double max_diff_forms_normalized = 0.0;
  // AgreeReward vs PottsDisagree updates, shared raw kernel.
  double max_diff_forms_raw = 0.0;
  // Same form, raw kernel vs normalized kernel (the constructed
  // counterexample: per-pixel row sums change the update).
  double max_diff_raw_vs_normalized = 0.0;
};

// Compare one mean-field update from state q under the four
// (form, kernel-normalization) combinations on a zero-unary CRF.
EquivalenceReport potential_equivalence_check(const KernelParams& params,
                                              const FeatureImage& feat,
                                              const DistributionGrid& q);

}  // namespace weakseg
