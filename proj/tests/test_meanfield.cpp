#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "weakseg/meanfield.hpp"

using namespace weakseg;

namespace {

PairwiseCrf zero_unary_crf(const ImageU8& image, int labels) {
  PairwiseCrf crf;
  crf.unary = LogitGrid(image.height, image.width, labels);  // all zeros
  crf.kernel = KernelParams{};
  crf.feat = FeatureImage::from_image(image);
  return crf;
}

}  // namespace

TEST_CASE("fixed points satisfy the exponential-consensus constraint") {
  const SyntheticScene scene = testutil::small_scene(71, 5);
  PairwiseCrf crf = zero_unary_crf(scene.image, 3);

  const auto fp = meanfield_fixed_point(
      crf, DistributionGrid::uniform(5, 5, 3), 400, 1e-12);
  CHECK(fp.residual < 1e-10);

  // Recompute q_i(l) ∝ exp(sum_{j != i} k(i,j) q_j(l)) from scratch with
  // kernel_value and compare entrywise.
  const int n = crf.feat.pixels();
  for (int i = 0; i < n; ++i) {
    double scores[3] = {0.0, 0.0, 0.0};
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double k = kernel_value(crf.kernel, crf.feat, i, j);
      for (int l = 0; l < 3; ++l) scores[l] += k * fp.q(j, l);
    }
    double z = 0.0;
    double e[3];
    for (int l = 0; l < 3; ++l) {
      e[l] = std::exp(scores[l]);
      z += e[l];
    }
    for (int l = 0; l < 3; ++l) {
      CHECK(fp.q(i, l) == doctest::Approx(e[l] / z).epsilon(5e-9));
    }
  }
}

TEST_CASE("step keeps distributions on the simplex and respects unaries") {
  Rng rng(72);
  const SyntheticScene scene = testutil::small_scene(73, 6);
  PairwiseCrf crf = zero_unary_crf(scene.image, 2);
  // A strong unary cost against label 1 at pixel 0 pushes its mass down.
  crf.unary(0, 1) = 8.0;

  const DistributionGrid q0 = testutil::random_distribution(rng, 6, 6, 2);
  const DistributionGrid q1 = meanfield_step(crf, q0);
  CHECK_NOTHROW(q1.validate());
  CHECK(q1(0, 1) < 0.05);
}

TEST_CASE("fixed_point reports the undamped residual of its iterate") {
  const SyntheticScene scene = testutil::small_scene(74, 5);
  PairwiseCrf crf = zero_unary_crf(scene.image, 3);
  MeanFieldEngine engine(crf);

  const auto fp = engine.fixed_point(DistributionGrid::uniform(5, 5, 3), 60, 1e-9);
  CHECK(fp.residual == doctest::Approx(engine.step_residual(fp.q)).epsilon(1e-12));
  CHECK(fp.iterations <= 60);
}

TEST_CASE("damping outside (0, 1] is rejected") {
  const SyntheticScene scene = testutil::small_scene(75, 4);
  PairwiseCrf crf = zero_unary_crf(scene.image, 2);
  MeanFieldEngine engine(crf);
  CHECK_THROWS(engine.fixed_point(DistributionGrid::uniform(4, 4, 2), 10, 1e-9, 0.0));
  CHECK_THROWS(engine.fixed_point(DistributionGrid::uniform(4, 4, 2), 10, 1e-9, 1.5));
}

TEST_CASE("exact enumeration produces a normalized joint distribution") {
  Rng rng(76);
  const ImageU8 image = testutil::random_image(rng, 2, 2);
  PairwiseCrf crf = zero_unary_crf(image, 2);
  ExactCrfDistribution exact(crf);

  CHECK(exact.pixels() == 4);
  CHECK(exact.num_classes() == 2);

  // All 16 labelings sum to probability 1.
  double total = 0.0;
  for (int s = 0; s < 16; ++s) {
    std::vector<int> labeling(4);
    for (int p = 0; p < 4; ++p) labeling[p] = (s >> p) & 1;
    const double pr = exact.prob(labeling);
    CHECK(pr == doctest::Approx(std::exp(exact.log_prob(labeling))).epsilon(1e-12));
    total += pr;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

  // Marginals are valid distributions.
  const DistributionGrid marg = exact.marginals();
  CHECK_NOTHROW(marg.validate());
}

TEST_CASE("the mean-field fixed point beats random factorized approximations") {
  Rng rng(77);
  const ImageU8 image = testutil::random_image(rng, 2, 2);
  PairwiseCrf crf = zero_unary_crf(image, 2);
  crf.unary(1, 0) = 0.7;
  crf.unary(2, 1) = 0.4;

  ExactCrfDistribution exact(crf);
  const auto fp = meanfield_fixed_point(
      crf, DistributionGrid::uniform(2, 2, 2), 300, 1e-11);
  const double kl_fp = exact.kl_from_factorized(fp.q);
  CHECK(kl_fp >= -1e-12);

  for (int t = 0; t < 50; ++t) {
    const DistributionGrid random = testutil::random_distribution(rng, 2, 2, 2);
    CHECK(exact.kl_from_factorized(random) >= kl_fp - 1e-12);
  }
}

TEST_CASE("exact enumeration rejects normalized kernels and big grids") {
  Rng rng(79);
  const ImageU8 image = testutil::random_image(rng, 2, 2);
  PairwiseCrf crf = zero_unary_crf(image, 2);
  crf.normalize_kernel = true;
  CHECK_THROWS(ExactCrfDistribution(crf));

  const SyntheticScene big = testutil::small_scene(80, 8);
  PairwiseCrf crf_big = zero_unary_crf(big.image, 4);  // 4^64 states
  CHECK_THROWS(ExactCrfDistribution(crf_big));
}

TEST_CASE("potential forms agree under a shared kernel; normalization changes the update") {
  Rng rng(81);
  const SyntheticScene scene = testutil::small_scene(82, 6);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  const DistributionGrid q = testutil::random_distribution(rng, 6, 6, 3);

  const EquivalenceReport rep = potential_equivalence_check(KernelParams{}, feat, q);
  CHECK(rep.max_diff_forms_normalized < 1e-10);
  CHECK(rep.max_diff_forms_raw < 1e-10);
  CHECK(rep.max_diff_raw_vs_normalized > 1e-3);
}
