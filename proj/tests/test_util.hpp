#pragma once

#include <cmath>
#include <vector>

#include "weakseg/image.hpp"
#include "weakseg/rng.hpp"
#include "weakseg/synth.hpp"

namespace weakseg::testutil {

// Random point on the interior of the simplex, one per pixel.
inline DistributionGrid random_distribution(Rng& rng, int height, int width,
                                            int channels) {
  DistributionGrid p(height, width, channels);
  for (int i = 0; i < p.pixels(); ++i) {
    double* row = p.pixel(i);
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      row[c] = 0.05 + rng.uniform();
      sum += row[c];
    }
    for (int c = 0; c < channels; ++c) row[c] /= sum;
  }
  return p;
}

inline LogitGrid random_logits(Rng& rng, int height, int width, int channels,
                               double scale = 1.5) {
  LogitGrid logits(height, width, channels);
  for (double& v : logits.raw()) v = scale * rng.normal();
  return logits;
}

inline ImageU8 random_image(Rng& rng, int height, int width) {
  ImageU8 image(height, width);
  for (uint8_t& v : image.rgb) {
    v = static_cast<uint8_t>(rng.uniform_int(256));
  }
  return image;
}

// Small noisy scene with one foreground shape; convenient default palette.
inline SyntheticScene small_scene(uint64_t seed, int size = 16,
                                  int num_classes = 3, int fg_class = 1) {
  SceneConfig config;
  config.size = size;
  config.num_classes = num_classes;
  config.fg_class = fg_class;
  config.palette = default_palette(num_classes - 1);
  // Unit tests want scenes a classifier can engage with at any size, not the
  // deliberately hard low-coverage training regime.
  config.min_coverage = 0.1;
  config.max_coverage = 0.35;
  return generate_scene(config, seed);
}

}  // namespace weakseg::testutil
