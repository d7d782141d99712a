#include "weakseg/neighborhood.hpp"

#include <cmath>

namespace weakseg {

NeighborhoodMode parse_neighborhood_mode(const std::string& name) {
  if (name == "weighted") return NeighborhoodMode::WeightedMean;
  if (name == "exponentiated") return NeighborhoodMode::ExponentiatedWeightedMean;
  throw std::invalid_argument("unknown neighborhood mode '" + name +
                              "' (expected 'weighted' or 'exponentiated')");
}

std::string neighborhood_mode_name(NeighborhoodMode mode) {
  return mode == NeighborhoodMode::WeightedMean ? "weighted" : "exponentiated";
}

namespace {

void check_normalizer(const DenseKernelFilter& filter) {
  for (double n : filter.normalizer()) {
    if (!(n > 0.0)) {
      throw std::domain_error(
          "weighted_mean: a pixel has zero total neighbor weight");
    }
  }
}

// (sum_{j != i} k p_j) / (sum_{j != i} k); rows sum to 1 because the
// normalizer is the same linear filter applied to a field of ones. The
// lattice backend can produce tiny negative entries near zero-probability
// labels (approximation error), which are clamped before renormalizing.
DistributionGrid weighted_mean_impl(const DenseKernelFilter& filter,
                                    const DistributionGrid& p) {
  check_normalizer(filter);
  Grid filtered = filter.apply(p);
  const int channels = p.channels();
  DistributionGrid out(p.height(), p.width(), channels);
  for (int i = 0; i < p.pixels(); ++i) {
    const double n = filter.normalizer()[i];
    const double* src = filtered.pixel(i);
    double* dst = out.pixel(i);
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      dst[c] = std::max(src[c] / n, 0.0);
      sum += dst[c];
    }
    for (int c = 0; c < channels; ++c) dst[c] /= sum;
  }
  return out;
}

}  // namespace

DistributionGrid weighted_mean(const DenseKernelFilter& filter,
                               const DistributionGrid& p) {
  return weighted_mean_impl(filter, p);
}

DistributionGrid exponentiated_weighted_mean(const DenseKernelFilter& filter,
                                             const DistributionGrid& p) {
  return DistributionGrid(
      softmax_grid(LogitGrid(Grid(weighted_mean_impl(filter, p)))));
}

DistributionGrid neighborhood_distribution(NeighborhoodMode mode,
                                           const DenseKernelFilter& filter,
                                           const DistributionGrid& p) {
  return mode == NeighborhoodMode::WeightedMean
             ? weighted_mean(filter, p)
             : exponentiated_weighted_mean(filter, p);
}

NeighborhoodLoss neighborhood_loss_and_grad(NeighborhoodMode mode,
                                            const DenseKernelFilter& filter,
                                            const LogitGrid& logits,
                                            bool stop_gradient) {
  const DistributionGrid p = softmax_grid(logits);
  const DistributionGrid target = neighborhood_distribution(mode, filter, p);

  NeighborhoodLoss result;
  result.target = target;
  result.loss = kl_divergence(p, target);

  const int channels = logits.channels();
  const int pixels = logits.pixels();
  const DistributionGrid pf = floored(p);
  const DistributionGrid tf = floored(target);

  // dL/dp with the target held fixed: log(p/t) + 1, per pixel and label.
  Grid dldp(logits.height(), logits.width(), channels);
  for (int i = 0; i < pixels; ++i) {
    const double* a = pf.pixel(i);
    const double* b = tf.pixel(i);
    double* g = dldp.pixel(i);
    for (int c = 0; c < channels; ++c) g[c] = std::log(a[c] / b[c]) + 1.0;
  }

  if (!stop_gradient) {
    // Chain through the target: t depends on p via the kernel average
    // m = (K p) / n. The loss contributes dL/dt = -p/t; pushing that
    // through t and m gives a per-pixel field r with
    //   weighted:       r_i = -(p_i / t_i) / n_i
    //   exponentiated:  r_i =  (t_i - p_i) / n_i
    // and the extra dL/dp is K^T r.
    Grid r(logits.height(), logits.width(), channels);
    for (int i = 0; i < pixels; ++i) {
      const double n = filter.normalizer()[i];
      const double* a = pf.pixel(i);
      const double* b = tf.pixel(i);
      double* dst = r.pixel(i);
      if (mode == NeighborhoodMode::WeightedMean) {
        for (int c = 0; c < channels; ++c) dst[c] = -(a[c] / b[c]) / n;
      } else {
        for (int c = 0; c < channels; ++c) dst[c] = (b[c] - a[c]) / n;
      }
    }
    Grid extra = filter.apply_transpose(r);
    for (int i = 0; i < pixels; ++i) {
      const double* e = extra.pixel(i);
      double* g = dldp.pixel(i);
      for (int c = 0; c < channels; ++c) g[c] += e[c];
    }
  }

  // Softmax chain rule: grad_f = p ⊙ (u - <p, u>).
  result.grad = LogitGrid(logits.height(), logits.width(), channels);
  for (int i = 0; i < pixels; ++i) {
    const double* pi = p.pixel(i);
    const double* u = dldp.pixel(i);
    double* g = result.grad.pixel(i);
    double inner = 0.0;
    for (int c = 0; c < channels; ++c) inner += pi[c] * u[c];
    for (int c = 0; c < channels; ++c) g[c] = pi[c] * (u[c] - inner);
  }
  return result;
}

DistributionGrid weighted_mean(const KernelParams& params,
                               const FeatureImage& feat,
                               const DistributionGrid& p) {
  DenseKernelFilter filter(params, feat,
                           DenseKernelFilter::auto_backend(feat.pixels()));
  return weighted_mean(filter, p);
}

DistributionGrid exponentiated_weighted_mean(const KernelParams& params,
                                             const FeatureImage& feat,
                                             const DistributionGrid& p) {
  DenseKernelFilter filter(params, feat,
                           DenseKernelFilter::auto_backend(feat.pixels()));
  return exponentiated_weighted_mean(filter, p);
}

NeighborhoodLoss neighborhood_loss_and_grad(NeighborhoodMode mode,
                                            const KernelParams& params,
                                            const FeatureImage& feat,
                                            const LogitGrid& logits,
                                            bool stop_gradient) {
  DenseKernelFilter filter(params, feat,
                           DenseKernelFilter::auto_backend(feat.pixels()));
  return neighborhood_loss_and_grad(mode, filter, logits, stop_gradient);
}

}  // namespace weakseg
