#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "test_util.hpp"
#include "weakseg/synth.hpp"

using namespace weakseg;
namespace fs = std::filesystem;

namespace {

double coverage(const MaskU8& mask) {
  int fg = 0;
  for (uint8_t l : mask.labels) fg += (l != 0) ? 1 : 0;
  return static_cast<double>(fg) / mask.pixels();
}

SceneConfig noiseless_config(double texture_density) {
  SceneConfig config;
  config.size = 32;
  config.sigma = 0.0;
  config.num_classes = 3;
  config.fg_class = 1;
  config.palette = default_palette(2);
  config.texture_density = texture_density;
  return config;
}

}  // namespace

TEST_CASE("scene generation is deterministic and seed-sensitive") {
  const SyntheticScene a = testutil::small_scene(121, 16);
  const SyntheticScene b = testutil::small_scene(121, 16);
  const SyntheticScene c = testutil::small_scene(122, 16);

  CHECK(a.image.rgb == b.image.rgb);
  CHECK(a.gt_mask.labels == b.gt_mask.labels);
  CHECK(a.image.rgb != c.image.rgb);
}

TEST_CASE("coverage lands inside the configured band") {
  SceneConfig config;
  config.size = 24;
  config.num_classes = 3;
  config.fg_class = 2;
  config.palette = default_palette(2);
  config.min_coverage = 0.1;
  config.max_coverage = 0.3;

  for (uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticScene scene = generate_scene(config, seed);
    const double cov = coverage(scene.gt_mask);
    CHECK(cov >= 0.1);
    CHECK(cov <= 0.3);
    CHECK(scene.labels.present() == std::vector<int>{0, 2});
    CHECK(scene.labels.num_classes() == 3);
    CHECK(scene.image.height == 24);
    CHECK(scene.image.width == 24);
  }
}

TEST_CASE("default low-coverage band keeps shapes small") {
  SceneConfig config;
  config.num_classes = 4;
  config.fg_class = 1;
  config.palette = default_palette(3);
  // Defaults: coverage in [0.05, 0.13].
  const SyntheticScene scene = generate_scene(config, 5);
  CHECK(coverage(scene.gt_mask) >= 0.05);
  CHECK(coverage(scene.gt_mask) <= 0.13);
}

TEST_CASE("mask labels never stray outside background and the scene class") {
  const SyntheticScene scene = testutil::small_scene(123, 20, 4, 3);
  for (uint8_t l : scene.gt_mask.labels) {
    CHECK((l == 0 || l == 3));
  }
}

TEST_CASE("palette collisions are rejected") {
  SceneConfig config;
  config.size = 16;
  config.sigma = 10.0;
  config.num_classes = 2;
  config.fg_class = 1;
  config.palette.background = {110, 110, 110};
  config.palette.foreground = {{112, 110, 109}};  // within 2 sigma of background
  CHECK_THROWS(generate_scene(config, 1));
}

TEST_CASE("background specks exist exactly when texture is enabled") {
  const ScenePalette palette = default_palette(2);

  const SyntheticScene plain = generate_scene(noiseless_config(0.0), 9);
  int off_palette = 0;
  for (int p = 0; p < plain.image.pixels(); ++p) {
    if (plain.gt_mask.labels[p] != 0) continue;
    const uint8_t* rgb = plain.image.pixel(p);
    if (rgb[0] != palette.background[0] || rgb[1] != palette.background[1] ||
        rgb[2] != palette.background[2]) {
      ++off_palette;
    }
  }
  CHECK(off_palette == 0);

  const SyntheticScene specked = generate_scene(noiseless_config(0.05), 9);
  off_palette = 0;
  for (int p = 0; p < specked.image.pixels(); ++p) {
    if (specked.gt_mask.labels[p] != 0) continue;
    const uint8_t* rgb = specked.image.pixel(p);
    if (rgb[0] != palette.background[0] || rgb[1] != palette.background[1] ||
        rgb[2] != palette.background[2]) {
      ++off_palette;
    }
  }
  // Specks recolor background pixels without touching their labels.
  CHECK(off_palette > 0);
  CHECK(coverage(specked.gt_mask) <= 0.13);
}

TEST_CASE("datasets cycle foreground classes deterministically") {
  const SceneDataset ds = generate_dataset(7, 16, 3, 10.0, 77);
  CHECK(ds.num_classes == 4);
  REQUIRE(ds.scenes.size() == 7);
  for (int i = 0; i < 7; ++i) {
    const int expected_fg = 1 + (i % 3);
    CHECK(ds.scenes[i].labels.present() == std::vector<int>{0, expected_fg});
  }

  const SceneDataset again = generate_dataset(7, 16, 3, 10.0, 77);
  for (int i = 0; i < 7; ++i) {
    CHECK(ds.scenes[i].image.rgb == again.scenes[i].image.rgb);
  }
}

TEST_CASE("dataset write/read round trips through the on-disk layout") {
  const fs::path dir = fs::temp_directory_path() / "weakseg_synth_test_ds";
  fs::remove_all(dir);

  const SceneDataset ds = generate_dataset(5, 12, 2, 8.0, 31);
  write_dataset(ds, dir);

  CHECK(fs::exists(dir / "scenes" / "0000.ppm"));
  CHECK(fs::exists(dir / "masks" / "0004.pgm"));
  std::ifstream labels(dir / "labels.csv");
  std::string header, first;
  std::getline(labels, header);
  std::getline(labels, first);
  CHECK(header == "scene,labels");
  CHECK(first == "0000,0 1");

  const SceneDataset back = read_dataset(dir);
  CHECK(back.num_classes == ds.num_classes);
  REQUIRE(back.scenes.size() == ds.scenes.size());
  for (size_t i = 0; i < ds.scenes.size(); ++i) {
    CHECK(back.scenes[i].image.rgb == ds.scenes[i].image.rgb);
    CHECK(back.scenes[i].gt_mask.labels == ds.scenes[i].gt_mask.labels);
    CHECK(back.scenes[i].labels.present() == ds.scenes[i].labels.present());
  }
  fs::remove_all(dir);
}

TEST_CASE("color_mask paints labels with palette colors") {
  const ScenePalette palette = default_palette(2);
  MaskU8 mask(1, 3);
  mask.labels = {0, 1, 2};
  const ImageU8 img = color_mask(mask, palette);
  CHECK(std::array<uint8_t, 3>{img.rgb[0], img.rgb[1], img.rgb[2]} ==
        palette.background);
  CHECK(std::array<uint8_t, 3>{img.rgb[3], img.rgb[4], img.rgb[5]} ==
        palette.foreground[0]);
  CHECK(std::array<uint8_t, 3>{img.rgb[6], img.rgb[7], img.rgb[8]} ==
        palette.foreground[1]);

  MaskU8 bad(1, 1);
  bad.labels = {3};  // palette only covers labels 0..2
  CHECK_THROWS(color_mask(bad, palette));
}

TEST_CASE("default palettes are distinct and sized to the class count") {
  const ScenePalette palette = default_palette(4);
  CHECK(palette.foreground.size() == 4);
  std::set<std::array<uint8_t, 3>> unique(palette.foreground.begin(),
                                          palette.foreground.end());
  unique.insert(palette.background);
  CHECK(unique.size() == 5);

  CHECK_THROWS(default_palette(7));  // only six foreground colors defined
}
