#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace weakseg {

// Dense height x width x channels field of doubles. Storage is pixel-major:
// all channels of one pixel are contiguous, pixels are row-major
// (p = row * width + col).
class Grid {
 public:
  Grid() = default;

  Grid(int height, int width, int channels, double value = 0.0) {
    if (height <= 0 || width <= 0 || channels <= 0) {
      throw std::invalid_argument("Grid: dimensions must be positive");
    }
    height_ = height;
    width_ = width;
    channels_ = channels;
    data_.assign(static_cast<size_t>(height) * width * channels, value);
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  int pixels() const { return height_ * width_; }
  bool empty() const { return data_.empty(); }

  double* pixel(int p) { return data_.data() + static_cast<size_t>(p) * channels_; }
  const double* pixel(int p) const {
    return data_.data() + static_cast<size_t>(p) * channels_;
  }

  double& operator()(int p, int c) {
    return data_[static_cast<size_t>(p) * channels_ + c];
  }
  double operator()(int p, int c) const {
    return data_[static_cast<size_t>(p) * channels_ + c];
  }

  double& at(int row, int col, int c) {
    check_index(row, col, c);
    return (*this)(row * width_ + col, c);
  }
  double at(int row, int col, int c) const {
    check_index(row, col, c);
    return (*this)(row * width_ + col, c);
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool same_shape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

 private:
  void check_index(int row, int col, int c) const {
    if (row < 0 || row >= height_ || col < 0 || col >= width_ || c < 0 ||
        c >= channels_) {
      throw std::out_of_range("Grid: index out of range");
    }
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Raw per-pixel scores, one channel per label. No constraints on values.
class LogitGrid : public Grid {
 public:
  LogitGrid() = default;
  LogitGrid(int height, int width, int labels, double value = 0.0)
      : Grid(height, width, labels, value) {}
  explicit LogitGrid(Grid g) : Grid(std::move(g)) {}
};

// Per-pixel categorical distributions: every pixel's channels are
// nonnegative and sum to 1 (within tolerance; see validate()).
class DistributionGrid : public Grid {
 public:
  DistributionGrid() = default;
  DistributionGrid(int height, int width, int labels, double value = 0.0)
      : Grid(height, width, labels, value) {}
  explicit DistributionGrid(Grid g) : Grid(std::move(g)) {}

  static DistributionGrid uniform(int height, int width, int labels) {
    return DistributionGrid(height, width, labels, 1.0 / labels);
  }

  // Largest per-pixel violation of the simplex constraints:
  // max over pixels of max(|sum - 1|, -min entry).
  double simplex_error() const {
    double worst = 0.0;
    for (int p = 0; p < pixels(); ++p) {
      const double* q = pixel(p);
      double sum = 0.0;
      double min_entry = q[0];
      for (int c = 0; c < channels(); ++c) {
        sum += q[c];
        min_entry = std::min(min_entry, q[c]);
      }
      worst = std::max(worst, std::abs(sum - 1.0));
      if (min_entry < 0.0) worst = std::max(worst, -min_entry);
    }
    return worst;
  }

  void validate(double tol = 1e-9) const {
    const double err = simplex_error();
    if (err > tol) {
      throw std::invalid_argument(
          "DistributionGrid: simplex violation " + std::to_string(err));
    }
  }
};

// The label universe of a scene: num_classes = background + foreground
// classes the model scores; present = sorted labels that actually occur,
// always including background 0.
class LabelSet {
 public:
  LabelSet() = default;

  LabelSet(int num_classes, std::vector<int> present)
      : num_classes_(num_classes), present_(std::move(present)) {
    if (num_classes_ < 2) {
      throw std::invalid_argument("LabelSet: need at least 2 classes");
    }
    std::sort(present_.begin(), present_.end());
    present_.erase(std::unique(present_.begin(), present_.end()),
                   present_.end());
    if (present_.empty() || present_.front() != 0) {
      throw std::invalid_argument("LabelSet: background 0 must be present");
    }
    if (present_.back() >= num_classes_ || present_.front() < 0) {
      throw std::invalid_argument("LabelSet: present label out of range");
    }
  }

  int num_classes() const { return num_classes_; }
  const std::vector<int>& present() const { return present_; }
  int present_count() const { return static_cast<int>(present_.size()); }
  int foreground_count() const { return present_count() - 1; }

  bool is_present(int label) const {
    return std::binary_search(present_.begin(), present_.end(), label);
  }

 private:
  int num_classes_ = 0;
  std::vector<int> present_;
};

}  // namespace weakseg
