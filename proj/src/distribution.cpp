#include "weakseg/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace weakseg {

DistributionGrid softmax_grid(const LogitGrid& logits) {
  if (logits.empty()) {
    throw std::invalid_argument("softmax_grid: empty grid");
  }
  DistributionGrid out(logits.height(), logits.width(), logits.channels());
  const int channels = logits.channels();
  for (int p = 0; p < logits.pixels(); ++p) {
    const double* f = logits.pixel(p);
    double* q = out.pixel(p);
    double max_logit = f[0];
    for (int c = 1; c < channels; ++c) max_logit = std::max(max_logit, f[c]);
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      q[c] = std::exp(f[c] - max_logit);
      sum += q[c];
    }
    for (int c = 0; c < channels; ++c) q[c] /= sum;
  }
  return out;
}

DistributionGrid floored(const DistributionGrid& p) {
  DistributionGrid out = p;
  const int channels = p.channels();
  for (int i = 0; i < p.pixels(); ++i) {
    double* q = out.pixel(i);
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      q[c] = std::min(std::max(q[c], kProbFloor), 1.0);
      sum += q[c];
    }
    for (int c = 0; c < channels; ++c) q[c] /= sum;
  }
  return out;
}

double kl_divergence(const DistributionGrid& p, const DistributionGrid& q) {
  if (!p.same_shape(q)) {
    throw std::invalid_argument("kl_divergence: shape mismatch");
  }
  const DistributionGrid pf = floored(p);
  const DistributionGrid qf = floored(q);
  double total = 0.0;
  const int channels = p.channels();
  for (int i = 0; i < p.pixels(); ++i) {
    const double* a = pf.pixel(i);
    const double* b = qf.pixel(i);
    for (int c = 0; c < channels; ++c) {
      total += a[c] * std::log(a[c] / b[c]);
    }
  }
  return total;
}

double entropy(std::span<const double> weights) {
  double h = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument("entropy: negative weight");
    }
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

}  // namespace weakseg
