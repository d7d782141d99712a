#include "weakseg/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "weakseg/image_io.hpp"
#include "weakseg/rng.hpp"

namespace weakseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

double color_distance(const std::array<uint8_t, 3>& a,
                      const std::array<uint8_t, 3>& b) {
  double d2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double d = static_cast<double>(a[c]) - static_cast<double>(b[c]);
    d2 += d * d;
  }
  return std::sqrt(d2);
}

struct Point {
  double x = 0.0;  // column
  double y = 0.0;  // row
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Rasterize one shape into a mask; pixel (row, col) samples the shape at its
// center (col + 0.5, row + 0.5).
MaskU8 rasterize(ShapeKind kind, const std::vector<Point>& geom, double radius,
                 int size, uint8_t label) {
  MaskU8 mask(size, size, 0);
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      const Point s{col + 0.5, row + 0.5};
      bool inside = false;
      switch (kind) {
        case ShapeKind::Disk: {
          const double dx = s.x - geom[0].x;
          const double dy = s.y - geom[0].y;
          inside = dx * dx + dy * dy <= radius * radius;
          break;
        }
        case ShapeKind::Rectangle: {
          inside = s.x >= geom[0].x && s.x <= geom[1].x && s.y >= geom[0].y &&
                   s.y <= geom[1].y;
          break;
        }
        case ShapeKind::Triangle: {
          const double c0 = cross(geom[0], geom[1], s);
          const double c1 = cross(geom[1], geom[2], s);
          const double c2 = cross(geom[2], geom[0], s);
          inside = (c0 >= 0 && c1 >= 0 && c2 >= 0) ||
                   (c0 <= 0 && c1 <= 0 && c2 <= 0);
          break;
        }
      }
      if (inside) mask.labels[row * size + col] = label;
    }
  }
  return mask;
}

std::string scene_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return buf;
}

}  // namespace

ScenePalette default_palette(int foreground_classes) {
  static const std::vector<std::array<uint8_t, 3>> kColors = {
      {200, 60, 60},  {60, 180, 60},  {70, 90, 200},
      {220, 200, 70}, {190, 80, 200}, {80, 200, 200},
  };
  if (foreground_classes < 1 ||
      foreground_classes > static_cast<int>(kColors.size())) {
    throw std::invalid_argument(
        "default_palette: supports 1.." + std::to_string(kColors.size()) +
        " foreground classes");
  }
  ScenePalette palette;
  palette.foreground.assign(kColors.begin(),
                            kColors.begin() + foreground_classes);
  return palette;
}

SyntheticScene generate_scene(const SceneConfig& config, uint64_t seed) {
  if (config.size < 4) {
    throw std::invalid_argument("generate_scene: size must be >= 4");
  }
  if (config.sigma < 0.0) {
    throw std::invalid_argument("generate_scene: sigma must be >= 0");
  }
  if (config.fg_class < 1 || config.fg_class >= config.num_classes) {
    throw std::invalid_argument("generate_scene: fg_class out of range");
  }
  if (static_cast<int>(config.palette.foreground.size()) < config.fg_class) {
    throw std::invalid_argument("generate_scene: palette missing fg_class");
  }
  if (!(config.min_coverage >= 0.0 && config.max_coverage <= 1.0 &&
        config.min_coverage < config.max_coverage)) {
    throw std::invalid_argument("generate_scene: bad coverage bounds");
  }

  const std::array<uint8_t, 3> fg_color =
      config.palette.foreground[config.fg_class - 1];
  // A foreground color within 2 sigma of the background is inseparable by
  // the contrast-sensitive kernel; refuse to generate such scenes.
  if (color_distance(fg_color, config.palette.background) <
      2.0 * config.sigma) {
    throw std::invalid_argument(
        "generate_scene: palette collision, |fg - bg| < 2 sigma");
  }

  Rng rng(seed);
  const int size = config.size;
  const int total = size * size;

  // Rejection-sample shape geometry until coverage lands in bounds.
  MaskU8 mask;
  bool ok = false;
  for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
    const double target = rng.uniform(
        std::max(config.min_coverage, 0.08), std::min(config.max_coverage, 0.45));
    const Point center{rng.uniform(0.25, 0.75) * size,
                       rng.uniform(0.25, 0.75) * size};
    std::vector<Point> geom;
    double radius = 0.0;
    switch (config.shape) {
      case ShapeKind::Disk: {
        radius = size * std::sqrt(target / kPi);
        geom = {center};
        break;
      }
      case ShapeKind::Rectangle: {
        const double aspect = rng.uniform(0.5, 2.0);
        const double w = size * std::sqrt(target * aspect);
        const double h = size * std::sqrt(target / aspect);
        geom = {{center.x - w / 2, center.y - h / 2},
                {center.x + w / 2, center.y + h / 2}};
        break;
      }
      case ShapeKind::Triangle: {
        const double base_r = size * std::sqrt(target / 1.3);
        const double phase = rng.uniform(0.0, 2.0 * kPi);
        geom.resize(3);
        for (int v = 0; v < 3; ++v) {
          const double angle =
              phase + v * (2.0 * kPi / 3) + rng.uniform(-0.5, 0.5);
          const double r = base_r * rng.uniform(0.7, 1.3);
          geom[v] = {center.x + r * std::cos(angle),
                     center.y + r * std::sin(angle)};
        }
        break;
      }
    }
    mask = rasterize(config.shape, geom, radius, size,
                     static_cast<uint8_t>(config.fg_class));
    int covered = 0;
    for (uint8_t v : mask.labels) covered += v != 0;
    const double coverage = static_cast<double>(covered) / total;
    ok = coverage >= config.min_coverage && coverage <= config.max_coverage;
  }
  if (!ok) {
    throw std::runtime_error(
        "generate_scene: could not hit coverage bounds in 64 attempts");
  }

  // Paint and add iid Gaussian noise per channel (row-major pixel order,
  // r,g,b within each pixel, so scenes are reproducible byte for byte).
  SyntheticScene scene;
  scene.seed = seed;
  scene.gt_mask = mask;
  scene.labels = LabelSet(config.num_classes, {0, config.fg_class});
  scene.image = ImageU8(size, size);
  for (int p = 0; p < total; ++p) {
    const std::array<uint8_t, 3>& base =
        mask.labels[p] != 0 ? fg_color : config.palette.background;
    uint8_t* dst = scene.image.pixel(p);
    for (int c = 0; c < 3; ++c) {
      double v = base[c];
      if (config.sigma > 0.0) v += config.sigma * rng.normal();
      dst[c] = static_cast<uint8_t>(std::min(255.0, std::max(0.0, std::round(v))));
    }
  }

  // Background texture: repaint tiny distractor specks over background
  // pixels in jittered foreground palette colors (any class, not just the
  // present one). They stay label 0 in gt_mask: locally they look like
  // foreground, and only their isolation gives them away.
  if (config.texture_density > 0.0 && !config.palette.foreground.empty()) {
    const double nominal_speck_area = 4.0;
    const int speck_count = static_cast<int>(
        std::lround(config.texture_density * total / nominal_speck_area));
    const int palette_size = static_cast<int>(config.palette.foreground.size());
    for (int s = 0; s < speck_count; ++s) {
      const Point center{rng.uniform(0.0, 1.0) * size,
                         rng.uniform(0.0, 1.0) * size};
      const double radius = rng.uniform(0.6, 1.7);
      const std::array<uint8_t, 3>& tint =
          config.palette.foreground[rng.uniform_int(palette_size)];
      std::array<double, 3> color;
      for (int c = 0; c < 3; ++c) {
        color[c] = tint[c] + rng.uniform(-20.0, 20.0);
      }
      const int row_lo = std::max(0, static_cast<int>(center.y - radius - 1));
      const int row_hi = std::min(size - 1, static_cast<int>(center.y + radius + 1));
      const int col_lo = std::max(0, static_cast<int>(center.x - radius - 1));
      const int col_hi = std::min(size - 1, static_cast<int>(center.x + radius + 1));
      for (int row = row_lo; row <= row_hi; ++row) {
        for (int col = col_lo; col <= col_hi; ++col) {
          const int p = row * size + col;
          if (mask.labels[p] != 0) continue;  // never overwrite the shape
          const double dx = col + 0.5 - center.x;
          const double dy = row + 0.5 - center.y;
          if (dx * dx + dy * dy > radius * radius) continue;
          uint8_t* dst = scene.image.pixel(p);
          for (int c = 0; c < 3; ++c) {
            double v = color[c];
            if (config.sigma > 0.0) v += config.sigma * rng.normal();
            dst[c] = static_cast<uint8_t>(
                std::min(255.0, std::max(0.0, std::round(v))));
          }
        }
      }
    }
  }
  return scene;
}

SceneDataset generate_dataset(int count, int size, int foreground_classes,
                              double sigma, uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("generate_dataset: count must be >= 1");
  }
  const ScenePalette palette = default_palette(foreground_classes);
  SceneDataset dataset;
  dataset.num_classes = foreground_classes + 1;
  dataset.scenes.reserve(count);
  for (int i = 0; i < count; ++i) {
    Rng meta(split_seed(seed, i));
    SceneConfig config;
    config.size = size;
    config.sigma = sigma;
    config.num_classes = dataset.num_classes;
    config.palette = palette;
    config.fg_class = 1 + i % foreground_classes;
    config.shape = static_cast<ShapeKind>(meta.uniform_int(3));
    dataset.scenes.push_back(generate_scene(config, meta.next_u64()));
  }
  return dataset;
}

void write_dataset(const SceneDataset& dataset,
                   const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scenes");
  fs::create_directories(dir / "masks");
  std::ofstream csv(dir / "labels.csv");
  if (!csv) {
    throw std::runtime_error("write_dataset: cannot write labels.csv");
  }
  csv << "scene,labels\n";
  for (size_t i = 0; i < dataset.scenes.size(); ++i) {
    const SyntheticScene& scene = dataset.scenes[i];
    const std::string name = scene_name(static_cast<int>(i));
    write_ppm(scene.image, dir / "scenes" / (name + ".ppm"));
    write_pgm(scene.gt_mask, dir / "masks" / (name + ".pgm"));
    csv << name << ",";
    const auto& present = scene.labels.present();
    for (size_t j = 0; j < present.size(); ++j) {
      if (j) csv << ' ';
      csv << present[j];
    }
    csv << '\n';
  }
  if (!csv) throw std::runtime_error("write_dataset: labels.csv write failed");
}

ImageU8 color_mask(const MaskU8& mask, const ScenePalette& palette) {
  ImageU8 image(mask.height, mask.width);
  const int total = mask.height * mask.width;
  for (int p = 0; p < total; ++p) {
    const int label = mask.labels[p];
    if (label > static_cast<int>(palette.foreground.size())) {
      throw std::invalid_argument("color_mask: label " + std::to_string(label) +
                                  " exceeds the palette");
    }
    const std::array<uint8_t, 3>& color =
        label == 0 ? palette.background : palette.foreground[label - 1];
    uint8_t* dst = image.pixel(p);
    for (int c = 0; c < 3; ++c) dst[c] = color[c];
  }
  return image;
}

void write_color_mask(const MaskU8& mask, const ScenePalette& palette,
                      const std::filesystem::path& path) {
  write_ppm(color_mask(mask, palette), path);
}

SceneDataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream csv(dir / "labels.csv");
  if (!csv) {
    throw std::runtime_error("read_dataset: missing labels.csv in " +
                             dir.string());
  }
  std::string line;
  if (!std::getline(csv, line) || line != "scene,labels") {
    throw std::runtime_error("read_dataset: bad labels.csv header");
  }

  struct Row {
    std::string name;
    std::vector<int> present;
  };
  std::vector<Row> rows;
  int max_label = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("read_dataset: malformed labels.csv row: " +
                               line);
    }
    Row row;
    row.name = line.substr(0, comma);
    std::istringstream labels(line.substr(comma + 1));
    int label = 0;
    while (labels >> label) {
      row.present.push_back(label);
      max_label = std::max(max_label, label);
    }
    if (row.present.empty()) {
      throw std::runtime_error("read_dataset: row without labels: " + line);
    }
    rows.push_back(std::move(row));
  }

  SceneDataset dataset;
  dataset.num_classes = max_label + 1;
  for (const Row& row : rows) {
    SyntheticScene scene;
    scene.image = read_ppm(dir / "scenes" / (row.name + ".ppm"));
    scene.gt_mask = read_pgm(dir / "masks" / (row.name + ".pgm"));
    if (scene.image.height != scene.gt_mask.height ||
        scene.image.width != scene.gt_mask.width) {
      throw std::runtime_error("read_dataset: image/mask size mismatch for " +
                               row.name);
    }
    scene.labels = LabelSet(dataset.num_classes, row.present);
    for (uint8_t v : scene.gt_mask.labels) {
      if (!scene.labels.is_present(v)) {
        throw std::runtime_error(
            "read_dataset: mask label not in labels.csv for " + row.name);
      }
    }
    dataset.scenes.push_back(std::move(scene));
  }
  return dataset;
}

}  // namespace weakseg
