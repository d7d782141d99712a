#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "weakseg/distribution.hpp"
#include "weakseg/losses.hpp"

using namespace weakseg;

TEST_CASE("classification loss is the cross entropy with gradient p - q") {
  Rng rng(91);
  const LogitGrid logits = testutil::random_logits(rng, 4, 4, 3);
  const DistributionGrid q = testutil::random_distribution(rng, 4, 4, 3);

  const ClassificationLoss res = classification_loss_and_grad(logits, q);
  const DistributionGrid p = softmax_grid(logits);

  double expected = 0.0;
  for (int i = 0; i < p.pixels(); ++i) {
    for (int c = 0; c < 3; ++c) expected -= q(i, c) * std::log(p(i, c));
  }
  CHECK(res.loss == doctest::Approx(expected).epsilon(1e-12));

  for (int i = 0; i < p.pixels(); ++i) {
    for (int c = 0; c < 3; ++c) {
      CHECK(res.grad(i, c) == doctest::Approx(p(i, c) - q(i, c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("classification gradients match finite differences") {
  Rng rng(92);
  LogitGrid logits = testutil::random_logits(rng, 3, 3, 3, 0.7);
  const DistributionGrid q = testutil::random_distribution(rng, 3, 3, 3);
  const ClassificationLoss res = classification_loss_and_grad(logits, q);

  const double h = 1e-6;
  for (int t = 0; t < 12; ++t) {
    const int p = rng.uniform_int(logits.pixels());
    const int c = rng.uniform_int(3);
    logits(p, c) += h;
    const double up = classification_loss_and_grad(logits, q).loss;
    logits(p, c) -= 2.0 * h;
    const double down = classification_loss_and_grad(logits, q).loss;
    logits(p, c) += h;
    CHECK(res.grad(p, c) ==
          doctest::Approx((up - down) / (2.0 * h)).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("lambda zero reduces the total loss to the classification term") {
  Rng rng(93);
  const SyntheticScene scene = testutil::small_scene(94, 8);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  const LogitGrid logits = testutil::random_logits(rng, 8, 8, 3);

  LossConfig config;
  config.lambda = 0.0;
  const LossReport report = total_loss_and_grad(
      config, KernelParams{}, feat, logits, scene.labels, PriorConstraints());

  CHECK(report.neighb_loss == 0.0);
  CHECK(report.total == report.class_loss);

  // The gradient must equal the classification gradient against the same
  // auxiliary target, bit for bit.
  const ClassificationLoss cls = classification_loss_and_grad(logits, report.aux);
  CHECK(report.grad.raw() == cls.grad.raw());
}

TEST_CASE("the total combines both terms with weight lambda") {
  Rng rng(95);
  const SyntheticScene scene = testutil::small_scene(96, 8);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  const DenseKernelFilter filter(KernelParams{}, feat,
                                 DenseKernelFilter::Backend::Exact);
  const LogitGrid logits = testutil::random_logits(rng, 8, 8, 3);

  LossConfig config;
  config.lambda = 0.7;
  const LossReport report = total_loss_and_grad(config, filter, logits,
                                                scene.labels, PriorConstraints());
  CHECK(report.total ==
        doctest::Approx(report.class_loss + 0.7 * report.neighb_loss).epsilon(1e-12));
  CHECK(report.pixel_count == 64);

  // Decompose: classification against the reported aux plus lambda times the
  // neighborhood gradient reproduces the combined gradient.
  const ClassificationLoss cls = classification_loss_and_grad(logits, report.aux);
  const NeighborhoodLoss nb =
      neighborhood_loss_and_grad(config.mode, filter, logits, config.stop_gradient);
  for (size_t i = 0; i < report.grad.raw().size(); ++i) {
    CHECK(report.grad.raw()[i] ==
          doctest::Approx(cls.grad.raw()[i] + 0.7 * nb.grad.raw()[i]).epsilon(1e-10));
  }
}

TEST_CASE("the auxiliary target zeroes absent labels and meets the prior") {
  Rng rng(97);
  const SyntheticScene scene = testutil::small_scene(98, 8, 4, 2);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  const LogitGrid logits = testutil::random_logits(rng, 8, 8, 4);

  const LossReport report = total_loss_and_grad(
      LossConfig{}, KernelParams{}, feat, logits, scene.labels, PriorConstraints());

  // Present labels are {0, 2}: labels 1 and 3 must carry exactly zero mass.
  for (int i = 0; i < report.aux.pixels(); ++i) {
    CHECK(report.aux(i, 1) == 0.0);
    CHECK(report.aux(i, 3) == 0.0);
  }
  if (report.prior.feasible) {
    CHECK(report.prior.mean_mass[0] >= 0.4 - 1e-12);
    CHECK(report.prior.mean_mass[2] >= 0.2 - 1e-12);
  }
}

TEST_CASE("disabling the prior drops the classification term entirely") {
  Rng rng(99);
  const SyntheticScene scene = testutil::small_scene(100, 8);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  const DenseKernelFilter filter(KernelParams{}, feat,
                                 DenseKernelFilter::Backend::Exact);
  const LogitGrid logits = testutil::random_logits(rng, 8, 8, 3);

  LossConfig config;
  config.use_prior = false;
  config.lambda = 2.0;
  const LossReport report =
      total_loss_and_grad(config, filter, logits, scene.labels, PriorConstraints());

  CHECK(report.class_loss == 0.0);
  CHECK(report.total == doctest::Approx(2.0 * report.neighb_loss).epsilon(1e-12));

  const NeighborhoodLoss nb =
      neighborhood_loss_and_grad(config.mode, filter, logits, config.stop_gradient);
  for (size_t i = 0; i < report.grad.raw().size(); ++i) {
    CHECK(report.grad.raw()[i] ==
          doctest::Approx(2.0 * nb.grad.raw()[i]).epsilon(1e-12));
  }
}

TEST_CASE("per-pixel normalization only rescales the reported quantities") {
  Rng rng(101);
  const SyntheticScene scene = testutil::small_scene(102, 8);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  const DenseKernelFilter filter(KernelParams{}, feat,
                                 DenseKernelFilter::Backend::Exact);
  const LogitGrid logits = testutil::random_logits(rng, 8, 8, 3);

  LossConfig sums;
  LossConfig means;
  means.normalize_per_pixel = true;

  const LossReport a = total_loss_and_grad(sums, filter, logits, scene.labels,
                                           PriorConstraints());
  const LossReport b = total_loss_and_grad(means, filter, logits, scene.labels,
                                           PriorConstraints());
  const double n = 64.0;
  CHECK(b.class_loss == doctest::Approx(a.class_loss / n).epsilon(1e-12));
  CHECK(b.neighb_loss == doctest::Approx(a.neighb_loss / n).epsilon(1e-12));
  CHECK(b.total == doctest::Approx(a.total / n).epsilon(1e-12));
  for (size_t i = 0; i < a.grad.raw().size(); ++i) {
    CHECK(b.grad.raw()[i] == doctest::Approx(a.grad.raw()[i] / n).epsilon(1e-12));
  }
}
