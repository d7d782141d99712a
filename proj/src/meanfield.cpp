#include "weakseg/meanfield.hpp"

#include <cmath>

#include "weakseg/distribution.hpp"

namespace weakseg {

MeanFieldEngine::MeanFieldEngine(const PairwiseCrf& crf,
                                 DenseKernelFilter::Backend backend)
    : crf_(crf), filter_(crf.kernel, crf.feat, backend) {
  if (crf_.unary.pixels() != crf_.feat.pixels()) {
    throw std::invalid_argument("MeanFieldEngine: unary/feature size mismatch");
  }
  if (crf_.normalize_kernel) {
    for (double n : filter_.normalizer()) {
      if (!(n > 0.0)) {
        throw std::domain_error(
            "MeanFieldEngine: normalized kernel requires positive row sums");
      }
    }
  }
}

MeanFieldEngine::MeanFieldEngine(const PairwiseCrf& crf)
    : MeanFieldEngine(crf, DenseKernelFilter::auto_backend(crf.feat.pixels())) {}

DistributionGrid MeanFieldEngine::step(const DistributionGrid& q) const {
  if (!q.same_shape(crf_.unary)) {
    throw std::invalid_argument("meanfield_step: q/unary shape mismatch");
  }
  const int channels = q.channels();
  Grid filtered = filter_.apply(q);

  // Expected pairwise energy seen by pixel i, label l:
  //   AgreeReward:   -sum_{j != i} k(i,j) q_j(l)
  //   PottsDisagree:  sum_{j != i} k(i,j) (1 - q_j(l))
  // With the normalized kernel, k(i,j) is divided by the row sum n_i, making
  // the Potts constant term 1 instead of n_i.
  DistributionGrid out(q.height(), q.width(), channels);
  for (int i = 0; i < q.pixels(); ++i) {
    const double n = filter_.normalizer()[i];
    const double* f = filtered.pixel(i);
    const double* u = crf_.unary.pixel(i);
    double* dst = out.pixel(i);

    double max_score = -1e300;
    for (int c = 0; c < channels; ++c) {
      double agree = f[c];
      double row_sum = n;
      if (crf_.normalize_kernel) {
        agree = f[c] / n;
        row_sum = 1.0;
      }
      const double pair_energy = crf_.form == PotentialForm::AgreeReward
                                     ? -agree
                                     : row_sum - agree;
      dst[c] = -(u[c] + pair_energy);  // log-score before normalization
      max_score = std::max(max_score, dst[c]);
    }
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      dst[c] = std::exp(dst[c] - max_score);
      sum += dst[c];
    }
    for (int c = 0; c < channels; ++c) dst[c] /= sum;
  }
  return out;
}

double MeanFieldEngine::step_residual(const DistributionGrid& q) const {
  const DistributionGrid next = step(q);
  double residual = 0.0;
  for (int i = 0; i < q.pixels(); ++i) {
    for (int c = 0; c < q.channels(); ++c) {
      residual = std::max(residual, std::abs(next(i, c) - q(i, c)));
    }
  }
  return residual;
}

MeanFieldEngine::FixedPoint MeanFieldEngine::fixed_point(
    const DistributionGrid& init, int max_iters, double tol,
    double damping) const {
  if (damping <= 0.0 || damping > 1.0) {
    throw std::invalid_argument("fixed_point: damping must be in (0, 1]");
  }
  FixedPoint result;
  result.q = init;
  for (int iter = 0; iter < max_iters; ++iter) {
    DistributionGrid next = step(result.q);
    // Undamped substitution residual, independent of the damping factor.
    double residual = 0.0;
    for (int i = 0; i < next.pixels(); ++i) {
      for (int c = 0; c < next.channels(); ++c) {
        residual = std::max(residual, std::abs(next(i, c) - result.q(i, c)));
      }
    }
    if (damping < 1.0) {
      for (int i = 0; i < next.pixels(); ++i) {
        for (int c = 0; c < next.channels(); ++c) {
          next(i, c) = damping * next(i, c) + (1.0 - damping) * result.q(i, c);
        }
      }
    }
    result.q = std::move(next);
    result.iterations = iter + 1;
    result.residual = residual;
    if (residual < tol) break;
  }
  // Report the residual at the final iterate.
  result.residual = step_residual(result.q);
  return result;
}

DistributionGrid meanfield_step(const PairwiseCrf& crf,
                                const DistributionGrid& q) {
  return MeanFieldEngine(crf).step(q);
}

MeanFieldEngine::FixedPoint meanfield_fixed_point(const PairwiseCrf& crf,
                                                  const DistributionGrid& init,
                                                  int max_iters, double tol,
                                                  double damping) {
  return MeanFieldEngine(crf).fixed_point(init, max_iters, tol, damping);
}

ExactCrfDistribution::ExactCrfDistribution(const PairwiseCrf& crf) {
  if (crf.normalize_kernel) {
    throw std::invalid_argument(
        "ExactCrfDistribution: the normalized kernel is not symmetric, no "
        "joint distribution corresponds to it");
  }
  pixels_ = crf.feat.pixels();
  num_classes_ = crf.unary.channels();
  height_ = crf.unary.height();
  width_ = crf.unary.width();
  if (crf.unary.pixels() != pixels_) {
    throw std::invalid_argument("ExactCrfDistribution: unary/feature mismatch");
  }

  double states = 1.0;
  for (int i = 0; i < pixels_; ++i) {
    states *= num_classes_;
    if (states > static_cast<double>(1 << 20)) {
      throw std::invalid_argument(
          "ExactCrfDistribution: state space exceeds 2^20");
    }
  }
  const size_t total = static_cast<size_t>(states);

  // Pairwise weights, each unordered pair once.
  std::vector<double> pair_k;
  pair_k.reserve(static_cast<size_t>(pixels_) * (pixels_ - 1) / 2);
  for (int i = 0; i < pixels_; ++i) {
    for (int j = i + 1; j < pixels_; ++j) {
      pair_k.push_back(kernel_value(crf.kernel, crf.feat, i, j));
    }
  }

  log_prob_.resize(total);
  std::vector<int> labeling(pixels_, 0);
  for (size_t s = 0; s < total; ++s) {
    // Decode the flat index (pixel 0 is the most significant digit).
    size_t rem = s;
    for (int i = pixels_ - 1; i >= 0; --i) {
      labeling[i] = static_cast<int>(rem % num_classes_);
      rem /= num_classes_;
    }
    double energy = 0.0;
    for (int i = 0; i < pixels_; ++i) energy += crf.unary(i, labeling[i]);
    size_t pair_idx = 0;
    for (int i = 0; i < pixels_; ++i) {
      for (int j = i + 1; j < pixels_; ++j, ++pair_idx) {
        const bool same = labeling[i] == labeling[j];
        if (crf.form == PotentialForm::AgreeReward) {
          if (same) energy -= pair_k[pair_idx];
        } else {
          if (!same) energy += pair_k[pair_idx];
        }
      }
    }
    log_prob_[s] = -energy;
  }

  // log-sum-exp normalization.
  double max_lp = log_prob_[0];
  for (double lp : log_prob_) max_lp = std::max(max_lp, lp);
  double sum = 0.0;
  for (double lp : log_prob_) sum += std::exp(lp - max_lp);
  log_partition_ = max_lp + std::log(sum);
  for (double& lp : log_prob_) lp -= log_partition_;
}

size_t ExactCrfDistribution::flat_index(std::span<const int> labeling) const {
  if (static_cast<int>(labeling.size()) != pixels_) {
    throw std::invalid_argument("ExactCrfDistribution: labeling size mismatch");
  }
  size_t s = 0;
  for (int i = 0; i < pixels_; ++i) {
    if (labeling[i] < 0 || labeling[i] >= num_classes_) {
      throw std::invalid_argument("ExactCrfDistribution: label out of range");
    }
    s = s * num_classes_ + labeling[i];
  }
  return s;
}

double ExactCrfDistribution::log_prob(std::span<const int> labeling) const {
  return log_prob_[flat_index(labeling)];
}

double ExactCrfDistribution::prob(std::span<const int> labeling) const {
  return std::exp(log_prob(labeling));
}

DistributionGrid ExactCrfDistribution::marginals() const {
  DistributionGrid out(height_, width_, num_classes_, 0.0);
  std::vector<int> labeling(pixels_, 0);
  for (size_t s = 0; s < log_prob_.size(); ++s) {
    size_t rem = s;
    for (int i = pixels_ - 1; i >= 0; --i) {
      labeling[i] = static_cast<int>(rem % num_classes_);
      rem /= num_classes_;
    }
    const double p = std::exp(log_prob_[s]);
    for (int i = 0; i < pixels_; ++i) out(i, labeling[i]) += p;
  }
  return out;
}

double ExactCrfDistribution::kl_from_factorized(const DistributionGrid& q) const {
  if (q.pixels() != pixels_ || q.channels() != num_classes_) {
    throw std::invalid_argument("kl_from_factorized: shape mismatch");
  }
  double kl = 0.0;
  std::vector<int> labeling(pixels_, 0);
  for (size_t s = 0; s < log_prob_.size(); ++s) {
    size_t rem = s;
    for (int i = pixels_ - 1; i >= 0; --i) {
      labeling[i] = static_cast<int>(rem % num_classes_);
      rem /= num_classes_;
    }
    double log_q = 0.0;
    double q_prob = 1.0;
    for (int i = 0; i < pixels_; ++i) {
      const double qi = std::max(q(i, labeling[i]), kProbFloor);
      log_q += std::log(qi);
      q_prob *= qi;
    }
    kl += q_prob * (log_q - log_prob_[s]);
  }
  return kl;
}

EquivalenceReport potential_equivalence_check(const KernelParams& params,
                                              const FeatureImage& feat,
                                              const DistributionGrid& q) {
  auto update = [&](PotentialForm form, bool normalize) {
    PairwiseCrf crf;
    crf.unary = LogitGrid(feat.height(), feat.width(), q.channels(), 0.0);
    crf.kernel = params;
    crf.feat = feat;
    crf.form = form;
    crf.normalize_kernel = normalize;
    return meanfield_step(crf, q);
  };

  const DistributionGrid agree_raw = update(PotentialForm::AgreeReward, false);
  const DistributionGrid potts_raw = update(PotentialForm::PottsDisagree, false);
  const DistributionGrid agree_norm = update(PotentialForm::AgreeReward, true);
  const DistributionGrid potts_norm = update(PotentialForm::PottsDisagree, true);

  auto max_diff = [](const DistributionGrid& a, const DistributionGrid& b) {
    double d = 0.0;
    for (int i = 0; i < a.pixels(); ++i) {
      for (int c = 0; c < a.channels(); ++c) {
        d = std::max(d, std::abs(a(i, c) - b(i, c)));
      }
    }
    return d;
  };

  EquivalenceReport report;
  report.max_diff_forms_normalized = max_diff(agree_norm, potts_norm);
  report.max_diff_forms_raw = max_diff(agree_raw, potts_raw);
  report.max_diff_raw_vs_normalized = max_diff(agree_raw, agree_norm);
  return report;
}

}  // namespace weakseg
