#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "weakseg/grid.hpp"
#include "weakseg/image.hpp"

namespace weakseg {

enum class ShapeKind { Disk, Rectangle, Triangle };

struct ScenePalette {
  std::array<uint8_t, 3> background = {110, 110, 110};
  // One color per foreground class (index class-1).
  std::vector<std::array<uint8_t, 3>> foreground;
};

// Default palette: moderately contrasting foreground colors so the bilateral
// kernel separates regions but a purely local classifier is not trivially
// perfect under noise.
ScenePalette default_palette(int foreground_classes);

struct SceneConfig {
  int size = 48;            // square scenes
  double sigma = 10.0;      // iid Gaussian pixel noise, clamped to [0, 255]
  ShapeKind shape = ShapeKind::Disk;
  int fg_class = 1;         // which class the single shape carries
  int num_classes = 4;      // background + all foreground classes the model
                            // scores (not just the one present here)
  ScenePalette palette;     // must cover fg_class
  // Default coverage keeps shapes well below the prior's foreground mass
  // floor (c_fg = 0.2), so image-level supervision alone systematically
  // overpredicts foreground. That is the regime the neighborhood loss is
  // designed to correct; widen the bounds for easier scenes.
  double min_coverage = 0.05;
  double max_coverage = 0.13;
  // Background texture: tiny distractor specks painted in (jittered)
  // foreground palette colors but labeled background. A local classifier
  // cannot tell them from true foreground; only their isolation gives them
  // away. Expected fraction of pixels covered; 0 disables the texture.
  double texture_density = 0.03;
};

struct SyntheticScene {
  ImageU8 image;
  MaskU8 gt_mask;
  LabelSet labels;  // {0, fg_class} out of num_classes
  uint64_t seed = 0;
};

// One background + one noisy foreground shape; coverage rejection-sampled
// into [min_coverage, max_coverage]. Deterministic in (config, seed).
// Throws if the foreground color is within 2 sigma of the background color
// (palette collision: the bilateral kernel could not separate the regions).
SyntheticScene generate_scene(const SceneConfig& config, uint64_t seed);

struct SceneDataset {
  int num_classes = 0;
  std::vector<SyntheticScene> scenes;
};

// count scenes cycling through the foreground classes, shapes drawn per
// scene from the seed stream. Deterministic in the arguments.
SceneDataset generate_dataset(int count, int size, int foreground_classes,
                              double sigma, uint64_t seed);

// On-disk layout: scenes/NNNN.ppm, masks/NNNN.pgm, labels.csv with header
// "scene,labels" and space-separated present labels per row ("0000,0 2").
void write_dataset(const SceneDataset& dataset,
                   const std::filesystem::path& dir);
SceneDataset read_dataset(const std::filesystem::path& dir);

// Label mask rendered with the palette colors (background color for label 0,
// foreground[l-1] otherwise). Throws when a label exceeds the palette.
ImageU8 color_mask(const MaskU8& mask, const ScenePalette& palette);
void write_color_mask(const MaskU8& mask, const ScenePalette& palette,
                      const std::filesystem::path& path);

}  // namespace weakseg
