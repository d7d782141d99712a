#include "weakseg/kernel.hpp"

#include <cmath>

#include "weakseg/permutohedral.hpp"

namespace weakseg {

namespace {

// Both exponents of the two-kernel potential for the pair (i, j).
inline void pair_terms(const KernelParams& params, const FeatureImage& feat,
                       int i, int j, double* bilateral, double* spatial) {
  const double* xi = feat.color(i);
  const double* xj = feat.color(j);
  const double dr = xi[0] - xj[0];
  const double dg = xi[1] - xj[1];
  const double db = xi[2] - xj[2];
  const double drow = feat.row(i) - feat.row(j);
  const double dcol = feat.col(i) - feat.col(j);
  const double color2 = dr * dr + dg * dg + db * db;
  const double pos2 = drow * drow + dcol * dcol;
  const double ta = params.theta_alpha;
  const double tb = params.theta_beta_eff();
  const double tg = params.theta_gamma_eff();
  *bilateral = std::exp(-color2 / (2.0 * ta * ta) - pos2 / (2.0 * tb * tb));
  *spatial = std::exp(-pos2 / (2.0 * tg * tg));
}

}  // namespace

double kernel_value(const KernelParams& params, const FeatureImage& feat,
                    int i, int j) {
  params.validate();
  if (i == j) {
    throw std::invalid_argument("kernel_value: diagonal i == j is excluded");
  }
  if (i < 0 || j < 0 || i >= feat.pixels() || j >= feat.pixels()) {
    throw std::invalid_argument("kernel_value: pixel index out of range");
  }
  double bilateral = 0.0, spatial = 0.0;
  pair_terms(params, feat, i, j, &bilateral, &spatial);
  return params.w1 * bilateral + params.w2 * spatial;
}

DenseKernelFilter::DenseKernelFilter(const KernelParams& params,
                                     const FeatureImage& feat, Backend backend)
    : params_(params), feat_(feat), backend_(backend) {
  params_.validate();
  const int n = feat_.pixels();

  if (backend_ == Backend::Exact) {
    if (n <= kMatrixCacheLimit) {
      matrix_.assign(static_cast<size_t>(n) * n, 0.0);
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          double bilateral = 0.0, spatial = 0.0;
          pair_terms(params_, feat_, i, j, &bilateral, &spatial);
          const double k = params_.w1 * bilateral + params_.w2 * spatial;
          matrix_[static_cast<size_t>(i) * n + j] = k;
          matrix_[static_cast<size_t>(j) * n + i] = k;
        }
      }
    }
  } else {
    const LatticeSetting setting =
        n <= kAccuratePixelLimit ? kAccurateSetting : kFastSetting;
    bilateral_gain_ = setting.gain;
    // Unit-bandwidth features for the two Gaussian lattices.
    const double ta = params_.theta_alpha * setting.bandwidth_scale;
    const double tb = params_.theta_beta_eff() * setting.bandwidth_scale;
    const double tg = params_.theta_gamma_eff();
    std::vector<double> f5(static_cast<size_t>(n) * 5);
    std::vector<double> f2(static_cast<size_t>(n) * 2);
    for (int p = 0; p < n; ++p) {
      const double* x = feat_.color(p);
      f5[p * 5 + 0] = x[0] / ta;
      f5[p * 5 + 1] = x[1] / ta;
      f5[p * 5 + 2] = x[2] / ta;
      f5[p * 5 + 3] = feat_.row(p) / tb;
      f5[p * 5 + 4] = feat_.col(p) / tb;
      f2[p * 2 + 0] = feat_.row(p) / tg;
      f2[p * 2 + 1] = feat_.col(p) / tg;
    }
    lattice_bilateral_ =
        std::make_unique<PermutohedralLattice>(f5, 5, n, setting.passes);
    lattice_spatial_ =
        std::make_unique<PermutohedralLattice>(f2, 2, n, kSpatialPasses);
  }

  // The normalizer sum_{j != i} k(i,j) is field-independent: filter a field
  // of ones once at construction.
  Grid ones(feat_.height(), feat_.width(), 1, 1.0);
  Grid filtered = apply_impl(ones, /*transpose=*/false);
  normalizer_.resize(n);
  for (int p = 0; p < n; ++p) normalizer_[p] = filtered(p, 0);
}

DenseKernelFilter::~DenseKernelFilter() = default;
DenseKernelFilter::DenseKernelFilter(DenseKernelFilter&&) noexcept = default;
DenseKernelFilter& DenseKernelFilter::operator=(DenseKernelFilter&&) noexcept =
    default;

Grid DenseKernelFilter::apply_impl(const Grid& v, bool transpose) const {
  if (v.pixels() != feat_.pixels()) {
    throw std::invalid_argument("DenseKernelFilter: field/feature size mismatch");
  }
  const int n = feat_.pixels();
  const int channels = v.channels();
  Grid out(v.height(), v.width(), channels, 0.0);

  if (backend_ == Backend::Exact) {
    // k is symmetric, so the transpose is the same operator.
    if (!matrix_.empty()) {
      for (int i = 0; i < n; ++i) {
        const double* row = matrix_.data() + static_cast<size_t>(i) * n;
        double* dst = out.pixel(i);
        for (int j = 0; j < n; ++j) {
          const double k = row[j];
          if (k == 0.0) continue;
          const double* src = v.pixel(j);
          for (int c = 0; c < channels; ++c) dst[c] += k * src[c];
        }
      }
    } else {
      for (int i = 0; i < n; ++i) {
        double* dst = out.pixel(i);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          double bilateral = 0.0, spatial = 0.0;
          pair_terms(params_, feat_, i, j, &bilateral, &spatial);
          const double k = params_.w1 * bilateral + params_.w2 * spatial;
          const double* src = v.pixel(j);
          for (int c = 0; c < channels; ++c) dst[c] += k * src[c];
        }
      }
    }
    return out;
  }

  // Lattice backend: each lattice includes a center tap (the j = i term the
  // sum excludes), whose exact weight the lattice reports per pixel.
  std::vector<double> tmp1(static_cast<size_t>(n) * channels);
  std::vector<double> tmp2(static_cast<size_t>(n) * channels);
  lattice_bilateral_->compute(v.raw().data(), tmp1.data(), channels, transpose);
  lattice_spatial_->compute(v.raw().data(), tmp2.data(), channels, transpose);
  const double w1 = params_.w1 * bilateral_gain_;
  const double w2 = params_.w2;
  for (int p = 0; p < n; ++p) {
    const double s1 = lattice_bilateral_->self_response(p);
    const double s2 = lattice_spatial_->self_response(p);
    const double* src = v.pixel(p);
    double* dst = out.pixel(p);
    for (int c = 0; c < channels; ++c) {
      dst[c] =
          w1 * (tmp1[static_cast<size_t>(p) * channels + c] - s1 * src[c]) +
          w2 * (tmp2[static_cast<size_t>(p) * channels + c] - s2 * src[c]);
    }
  }
  return out;
}

Grid DenseKernelFilter::apply(const Grid& v) const {
  return apply_impl(v, /*transpose=*/false);
}

Grid DenseKernelFilter::apply_transpose(const Grid& v) const {
  return apply_impl(v, /*transpose=*/true);
}

FilterResult filter_exact(const KernelParams& params, const FeatureImage& feat,
                          const Grid& v) {
  DenseKernelFilter filter(params, feat, DenseKernelFilter::Backend::Exact);
  return FilterResult{filter.apply(v), filter.normalizer()};
}

FilterResult filter_fast(const KernelParams& params, const FeatureImage& feat,
                         const Grid& v) {
  DenseKernelFilter filter(params, feat, DenseKernelFilter::Backend::Lattice);
  return FilterResult{filter.apply(v), filter.normalizer()};
}

}  // namespace weakseg
