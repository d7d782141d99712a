#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "weakseg/distribution.hpp"
#include "weakseg/neighborhood.hpp"

using namespace weakseg;

namespace {

DenseKernelFilter exact_filter(const ImageU8& image) {
  return DenseKernelFilter(KernelParams{}, FeatureImage::from_image(image),
                           DenseKernelFilter::Backend::Exact);
}

int argmax(const double* row, int channels) {
  return static_cast<int>(std::max_element(row, row + channels) - row);
}

// Central finite difference of the neighborhood loss in logit space.
double fd_loss(NeighborhoodMode mode, const DenseKernelFilter& filter,
               LogitGrid logits, bool stop_gradient, int p, int c, double h) {
  logits(p, c) += h;
  const double up =
      neighborhood_loss_and_grad(mode, filter, logits, stop_gradient).loss;
  logits(p, c) -= 2.0 * h;
  const double down =
      neighborhood_loss_and_grad(mode, filter, logits, stop_gradient).loss;
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("mode names parse and round trip") {
  CHECK(parse_neighborhood_mode("weighted") == NeighborhoodMode::WeightedMean);
  CHECK(parse_neighborhood_mode("exponentiated") ==
        NeighborhoodMode::ExponentiatedWeightedMean);
  CHECK(neighborhood_mode_name(NeighborhoodMode::WeightedMean) == "weighted");
  CHECK(neighborhood_mode_name(NeighborhoodMode::ExponentiatedWeightedMean) ==
        "exponentiated");
  CHECK_THROWS(parse_neighborhood_mode("mean"));
}

TEST_CASE("weighted mean of a constant field is the same constant") {
  const SyntheticScene scene = testutil::small_scene(41, 10);
  const DenseKernelFilter filter = exact_filter(scene.image);

  DistributionGrid p(10, 10, 3);
  for (int i = 0; i < p.pixels(); ++i) {
    p(i, 0) = 0.6;
    p(i, 1) = 0.3;
    p(i, 2) = 0.1;
  }
  const DistributionGrid m = weighted_mean(filter, p);
  for (int i = 0; i < m.pixels(); ++i) {
    CHECK(m(i, 0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m(i, 1) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(m(i, 2) == doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("weighted mean stays on the simplex and inside the value range") {
  Rng rng(42);
  const SyntheticScene scene = testutil::small_scene(43, 12);
  const DenseKernelFilter filter = exact_filter(scene.image);
  const DistributionGrid p = testutil::random_distribution(rng, 12, 12, 4);

  const DistributionGrid m = weighted_mean(filter, p);
  CHECK_NOTHROW(m.validate());
  for (int c = 0; c < 4; ++c) {
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < p.pixels(); ++i) {
      lo = std::min(lo, p(i, c));
      hi = std::max(hi, p(i, c));
    }
    for (int i = 0; i < m.pixels(); ++i) {
      CHECK(m(i, c) >= lo - 1e-12);
      CHECK(m(i, c) <= hi + 1e-12);
    }
  }
}

TEST_CASE("exponentiated mode is exactly the per-pixel softmax of the mean") {
  Rng rng(44);
  const SyntheticScene scene = testutil::small_scene(45, 9);
  const DenseKernelFilter filter = exact_filter(scene.image);
  const DistributionGrid p = testutil::random_distribution(rng, 9, 9, 3);

  const DistributionGrid m = weighted_mean(filter, p);
  const DistributionGrid e = exponentiated_weighted_mean(filter, p);

  for (int i = 0; i < p.pixels(); ++i) {
    double z = 0.0;
    for (int c = 0; c < 3; ++c) z += std::exp(m(i, c));
    for (int c = 0; c < 3; ++c) {
      CHECK(e(i, c) == doctest::Approx(std::exp(m(i, c)) / z).epsilon(1e-12));
    }
    // Exponentiation never moves the per-pixel winner.
    CHECK(argmax(e.pixel(i), 3) == argmax(m.pixel(i), 3));
  }
}

TEST_CASE("neighborhood_distribution dispatches on the mode") {
  Rng rng(46);
  const SyntheticScene scene = testutil::small_scene(47, 8);
  const DenseKernelFilter filter = exact_filter(scene.image);
  const DistributionGrid p = testutil::random_distribution(rng, 8, 8, 3);

  const DistributionGrid viaEnum =
      neighborhood_distribution(NeighborhoodMode::WeightedMean, filter, p);
  const DistributionGrid direct = weighted_mean(filter, p);
  CHECK(viaEnum.raw() == direct.raw());
}

TEST_CASE("single-pixel grids have no neighbors and are rejected") {
  ImageU8 image(1, 1);
  image.rgb = {1, 2, 3};
  const DenseKernelFilter filter = exact_filter(image);
  const DistributionGrid p = DistributionGrid::uniform(1, 1, 2);
  CHECK_THROWS(weighted_mean(filter, p));
}

TEST_CASE("neighborhood loss equals the KL between prediction and target") {
  Rng rng(48);
  const SyntheticScene scene = testutil::small_scene(49, 7);
  const DenseKernelFilter filter = exact_filter(scene.image);
  const LogitGrid logits = testutil::random_logits(rng, 7, 7, 3);

  for (NeighborhoodMode mode : {NeighborhoodMode::WeightedMean,
                                NeighborhoodMode::ExponentiatedWeightedMean}) {
    const NeighborhoodLoss res =
        neighborhood_loss_and_grad(mode, filter, logits, true);
    const DistributionGrid p = softmax_grid(logits);
    CHECK(res.loss ==
          doctest::Approx(kl_divergence(p, res.target)).epsilon(1e-10));
    CHECK(res.loss >= 0.0);
  }
}

TEST_CASE("neighborhood loss gradients match finite differences") {
  Rng rng(50);
  const SyntheticScene scene = testutil::small_scene(51, 5);
  const DenseKernelFilter filter = exact_filter(scene.image);
  const LogitGrid logits = testutil::random_logits(rng, 5, 5, 3, 0.8);

  for (NeighborhoodMode mode : {NeighborhoodMode::WeightedMean,
                                NeighborhoodMode::ExponentiatedWeightedMean}) {
    for (bool stop_gradient : {true, false}) {
      const NeighborhoodLoss res =
          neighborhood_loss_and_grad(mode, filter, logits, stop_gradient);
      // Spot-check a scattering of coordinates (full sweeps live in the
      // verification suites).
      for (int t = 0; t < 10; ++t) {
        const int p = rng.uniform_int(logits.pixels());
        const int c = rng.uniform_int(3);
        const double fd = fd_loss(mode, filter, logits, stop_gradient, p, c, 1e-6);
        CHECK(res.grad(p, c) == doctest::Approx(fd).epsilon(5e-5).scale(1.0));
      }
    }
  }
}
