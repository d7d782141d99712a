#include "weakseg/losses.hpp"

#include <cmath>

namespace weakseg {

ClassificationLoss classification_loss_and_grad(const LogitGrid& logits,
                                                const DistributionGrid& q_aux) {
  if (!logits.same_shape(q_aux)) {
    throw std::invalid_argument(
        "classification_loss_and_grad: shape mismatch");
  }
  const DistributionGrid p = softmax_grid(logits);
  const DistributionGrid pf = floored(p);
  const int channels = logits.channels();

  ClassificationLoss result;
  result.grad = LogitGrid(logits.height(), logits.width(), channels);
  for (int i = 0; i < logits.pixels(); ++i) {
    const double* target = q_aux.pixel(i);
    const double* prob = p.pixel(i);
    const double* prob_f = pf.pixel(i);
    double* g = result.grad.pixel(i);
    for (int c = 0; c < channels; ++c) {
      // 0 * log(anything) = 0: absent labels carry exactly zero target mass.
      if (target[c] != 0.0) result.loss -= target[c] * std::log(prob_f[c]);
      g[c] = prob[c] - target[c];
    }
  }
  return result;
}

namespace {

// filter may be null only when config.lambda == 0 (the neighborhood term is
// skipped entirely in that case).
LossReport total_loss_impl(const LossConfig& config,
                           const DenseKernelFilter* filter,
                           const LogitGrid& logits, const LabelSet& labels,
                           const PriorConstraints& constraints,
                           int prior_grid_size) {
  if (logits.channels() != labels.num_classes()) {
    throw std::invalid_argument("total_loss_and_grad: channel/label mismatch");
  }
  if (config.lambda != 0.0 && filter == nullptr) {
    throw std::logic_error("total_loss_and_grad: neighborhood term needs a filter");
  }
  if (filter && logits.pixels() != filter->pixels()) {
    throw std::invalid_argument("total_loss_and_grad: logits/filter mismatch");
  }

  LossReport report;
  report.pixel_count = logits.pixels();
  report.grad = LogitGrid(logits.height(), logits.width(), logits.channels(), 0.0);

  if (config.use_prior) {
    const DistributionGrid p = softmax_grid(logits);
    report.prior = solve_prior(p, labels, constraints, prior_grid_size);
    report.aux = apply_prior(p, report.prior.beta, labels);
    ClassificationLoss cls = classification_loss_and_grad(logits, report.aux);
    report.class_loss = cls.loss;
    report.grad = std::move(cls.grad);
  } else {
    // Negative control: skip the entropy-maximizing solver and instead give
    // the class prior the value that minimizes the classification loss
    // outright. Because the loss is linear in beta, that minimizer is a
    // vertex of the simplex: all prior mass on the single present label with
    // the highest total log-likelihood, so every pixel receives that one
    // label as its auxiliary target. This is the degenerate self-labeling
    // the constrained prior exists to prevent.
    const DistributionGrid pf = floored(softmax_grid(logits));
    int best = -1;
    double best_score = 0.0;
    for (int l : labels.present()) {
      double score = 0.0;
      for (int i = 0; i < pf.pixels(); ++i) score += std::log(pf.pixel(i)[l]);
      if (best < 0 || score > best_score) {
        best_score = score;
        best = l;
      }
    }
    report.aux =
        DistributionGrid(logits.height(), logits.width(), logits.channels());
    for (int i = 0; i < report.aux.pixels(); ++i) {
      report.aux.pixel(i)[best] = 1.0;
    }
    ClassificationLoss cls = classification_loss_and_grad(logits, report.aux);
    report.class_loss = cls.loss;
    report.grad = std::move(cls.grad);
    report.prior.beta.assign(logits.channels(), 0.0);
    report.prior.beta[best] = 1.0;
    report.prior.feasible = false;
    report.prior.objective = 0.0;
    report.prior.mean_mass.assign(logits.channels(), 0.0);
    report.prior.mean_mass[best] = 1.0;
    for (int l : labels.present()) {
      report.prior.hinge +=
          std::max(0.0, constraints.c(l) - report.prior.mean_mass[l]);
    }
  }

  if (config.lambda != 0.0) {
    NeighborhoodLoss neighb = neighborhood_loss_and_grad(
        config.mode, *filter, logits, config.stop_gradient);
    report.neighb_loss = neighb.loss;
    for (int i = 0; i < logits.pixels(); ++i) {
      const double* src = neighb.grad.pixel(i);
      double* dst = report.grad.pixel(i);
      for (int c = 0; c < logits.channels(); ++c) {
        dst[c] += config.lambda * src[c];
      }
    }
  }

  report.total = report.class_loss + config.lambda * report.neighb_loss;

  if (config.normalize_per_pixel) {
    const double scale = 1.0 / report.pixel_count;
    report.class_loss *= scale;
    report.neighb_loss *= scale;
    report.total *= scale;
    for (double& g : report.grad.raw()) g *= scale;
  }
  return report;
}

}  // namespace

LossReport total_loss_and_grad(const LossConfig& config,
                               const DenseKernelFilter& filter,
                               const LogitGrid& logits, const LabelSet& labels,
                               const PriorConstraints& constraints,
                               int prior_grid_size) {
  return total_loss_impl(config, &filter, logits, labels, constraints,
                         prior_grid_size);
}

LossReport total_loss_and_grad(const LossConfig& config,
                               const KernelParams& params,
                               const FeatureImage& feat,
                               const LogitGrid& logits, const LabelSet& labels,
                               const PriorConstraints& constraints,
                               int prior_grid_size) {
  if (config.lambda == 0.0) {
    return total_loss_impl(config, nullptr, logits, labels, constraints,
                           prior_grid_size);
  }
  DenseKernelFilter filter(params, feat,
                           DenseKernelFilter::auto_backend(feat.pixels()));
  return total_loss_impl(config, &filter, logits, labels, constraints,
                         prior_grid_size);
}

}  // namespace weakseg
