#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace weakseg {

// 8-bit RGB image, pixel-major rows (r, g, b per pixel).
struct ImageU8 {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> rgb;  // size height * width * 3

  ImageU8() = default;
  ImageU8(int h, int w, uint8_t fill = 0)
      : height(h), width(w), rgb(static_cast<size_t>(h) * w * 3, fill) {
    if (h <= 0 || w <= 0) {
      throw std::invalid_argument("ImageU8: dimensions must be positive");
    }
  }

  int pixels() const { return height * width; }
  uint8_t* pixel(int p) { return rgb.data() + static_cast<size_t>(p) * 3; }
  const uint8_t* pixel(int p) const {
    return rgb.data() + static_cast<size_t>(p) * 3;
  }
};

// 8-bit label mask; value = class id (0 = background).
struct MaskU8 {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> labels;  // size height * width

  MaskU8() = default;
  MaskU8(int h, int w, uint8_t fill = 0)
      : height(h), width(w), labels(static_cast<size_t>(h) * w, fill) {
    if (h <= 0 || w <= 0) {
      throw std::invalid_argument("MaskU8: dimensions must be positive");
    }
  }

  int pixels() const { return height * width; }
};

// Per-pixel features the pairwise kernel reads: RGB in [0, 255] as doubles
// plus the implicit (row, col) position.
class FeatureImage {
 public:
  FeatureImage() = default;

  FeatureImage(int height, int width, std::vector<double> rgb)
      : height_(height), width_(width), rgb_(std::move(rgb)) {
    if (height <= 0 || width <= 0) {
      throw std::invalid_argument("FeatureImage: dimensions must be positive");
    }
    if (rgb_.size() != static_cast<size_t>(height) * width * 3) {
      throw std::invalid_argument("FeatureImage: rgb size mismatch");
    }
  }

  static FeatureImage from_image(const ImageU8& image) {
    std::vector<double> rgb(image.rgb.begin(), image.rgb.end());
    return FeatureImage(image.height, image.width, std::move(rgb));
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int pixels() const { return height_ * width_; }

  const double* color(int p) const {
    return rgb_.data() + static_cast<size_t>(p) * 3;
  }
  double row(int p) const { return static_cast<double>(p / width_); }
  double col(int p) const { return static_cast<double>(p % width_); }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> rgb_;
};

}  // namespace weakseg
