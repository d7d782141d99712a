#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "weakseg/kernel.hpp"

using namespace weakseg;

namespace {

// Plain triple-loop evaluation of the filtered sums, written independently
// of the library's exact backend.
FilterResult brute_force_filter(const KernelParams& params,
                                const FeatureImage& feat, const Grid& v) {
  FilterResult out{Grid(feat.height(), feat.width(), v.channels()),
                   std::vector<double>(feat.pixels(), 0.0)};
  for (int i = 0; i < feat.pixels(); ++i) {
    for (int j = 0; j < feat.pixels(); ++j) {
      if (i == j) continue;
      const double k = kernel_value(params, feat, i, j);
      out.normalizer[i] += k;
      for (int c = 0; c < v.channels(); ++c) {
        out.values(i, c) += k * v(j, c);
      }
    }
  }
  return out;
}

double rel_l1(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += std::abs(a[i] - b[i]);
    den += std::abs(b[i]);
  }
  return num / den;
}

}  // namespace

TEST_CASE("kernel_value matches the two-term formula") {
  ImageU8 image(2, 2);
  image.rgb = {10, 20, 30,  40, 60, 80,  10, 20, 30,  200, 10, 50};
  const FeatureImage feat = FeatureImage::from_image(image);
  KernelParams params;

  // Pixels 0 (row 0, col 0) and 3 (row 1, col 1): color gaps 190, 10, 20.
  const double color2 = 190.0 * 190.0 + 10.0 * 10.0 + 20.0 * 20.0;
  const double pos2 = 1.0 + 1.0;
  const double expected =
      params.w1 * std::exp(-color2 / (2.0 * params.theta_alpha * params.theta_alpha) -
                           pos2 / (2.0 * params.theta_beta * params.theta_beta)) +
      params.w2 * std::exp(-pos2 / (2.0 * params.theta_gamma * params.theta_gamma));
  CHECK(kernel_value(params, feat, 0, 3) == doctest::Approx(expected).epsilon(1e-14));

  SUBCASE("symmetry") {
    CHECK(kernel_value(params, feat, 0, 3) ==
          doctest::Approx(kernel_value(params, feat, 3, 0)).epsilon(1e-15));
  }
  SUBCASE("identical pixels at distance zero would need i == j, which errors") {
    CHECK_THROWS(kernel_value(params, feat, 1, 1));
  }
  SUBCASE("downscale divides the spatial bandwidths only") {
    KernelParams scaled = params;
    scaled.downscale = 2;
    const double expected2 =
        params.w1 *
            std::exp(-color2 / (2.0 * params.theta_alpha * params.theta_alpha) -
                     pos2 / (2.0 * 6.5 * 6.5)) +
        params.w2 * std::exp(-pos2 / (2.0 * 1.5 * 1.5));
    CHECK(kernel_value(scaled, feat, 0, 3) ==
          doctest::Approx(expected2).epsilon(1e-14));
  }
}

TEST_CASE("kernel params validation rejects bad values") {
  KernelParams p;
  p.w1 = -1.0;
  CHECK_THROWS(p.validate());
  p = KernelParams{};
  p.theta_gamma = 0.0;
  CHECK_THROWS(p.validate());
  p = KernelParams{};
  p.downscale = 0;
  CHECK_THROWS(p.validate());
}

TEST_CASE("exact filter equals brute-force triple-loop summation") {
  Rng rng(301);
  for (int trial = 0; trial < 3; ++trial) {
    const int size = 5 + 2 * trial;
    const ImageU8 image = testutil::random_image(rng, size, size);
    const FeatureImage feat = FeatureImage::from_image(image);
    Grid v(size, size, 2);
    for (double& x : v.raw()) x = rng.uniform(-1.0, 1.0);

    KernelParams params;
    if (trial == 1) params.downscale = 2;
    if (trial == 2) {
      params.w1 = 4.0;
      params.theta_alpha = 25.0;
    }

    const FilterResult exact = filter_exact(params, feat, v);
    const FilterResult brute = brute_force_filter(params, feat, v);
    for (size_t i = 0; i < exact.values.raw().size(); ++i) {
      CHECK(exact.values.raw()[i] ==
            doctest::Approx(brute.values.raw()[i]).epsilon(1e-12));
    }
    for (int i = 0; i < feat.pixels(); ++i) {
      CHECK(exact.normalizer[i] ==
            doctest::Approx(brute.normalizer[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact filter apply and apply_transpose coincide (symmetric kernel)") {
  Rng rng(302);
  const SyntheticScene scene = testutil::small_scene(17, 12);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  DenseKernelFilter filter(KernelParams{}, feat, DenseKernelFilter::Backend::Exact);

  Grid v(12, 12, 3);
  for (double& x : v.raw()) x = rng.uniform(0.0, 1.0);
  const Grid a = filter.apply(v);
  const Grid b = filter.apply_transpose(v);
  for (size_t i = 0; i < a.raw().size(); ++i) {
    CHECK(a.raw()[i] == doctest::Approx(b.raw()[i]).epsilon(1e-12));
  }
}

TEST_CASE("lattice filter approximates the exact filter on a noisy scene") {
  Rng rng(303);
  const SyntheticScene scene = testutil::small_scene(23, 24);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  Grid v(24, 24, 3);
  for (double& x : v.raw()) x = rng.uniform(0.0, 1.0);

  const FilterResult exact = filter_exact(KernelParams{}, feat, v);
  const FilterResult fast = filter_fast(KernelParams{}, feat, v);

  CHECK(rel_l1(fast.values.raw(), exact.values.raw()) < 0.05);
  CHECK(rel_l1(fast.normalizer, exact.normalizer) < 0.05);
}

TEST_CASE("automatic backend switches at 1024 pixels") {
  CHECK(DenseKernelFilter::auto_backend(1024) == DenseKernelFilter::Backend::Exact);
  CHECK(DenseKernelFilter::auto_backend(1025) == DenseKernelFilter::Backend::Lattice);
}

TEST_CASE("normalizers are strictly positive on multi-pixel grids") {
  const SyntheticScene scene = testutil::small_scene(29, 8);
  const FeatureImage feat = FeatureImage::from_image(scene.image);
  DenseKernelFilter filter(KernelParams{}, feat, DenseKernelFilter::Backend::Exact);
  for (double n : filter.normalizer()) CHECK(n > 0.0);
}
