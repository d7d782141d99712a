#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "weakseg/grid.hpp"
#include "weakseg/image.hpp"

namespace weakseg {

// Channel-major (c, h, w) activation block used inside the network.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        v(static_cast<size_t>(c) * h * w, fill) {}

  double* plane(int c) { return v.data() + static_cast<size_t>(c) * height * width; }
  const double* plane(int c) const {
    return v.data() + static_cast<size_t>(c) * height * width;
  }
};

// Small fully convolutional net: 3x3 convolutions, stride 1, same padding,
// ReLU between layers, linear last layer producing one logit channel per
// class. All arithmetic is double precision and hand-rolled so gradients can
// be finite-difference checked end to end.
class TinyFcn {
 public:
  static constexpr int kKernelSize = 3;
  static constexpr uint32_t kCheckpointVersion = 1;

  struct Layer {
    int in_ch = 0;
    int out_ch = 0;
    std::vector<double> w;  // out_ch * in_ch * 3 * 3, row-major
    std::vector<double> b;  // out_ch
  };

  TinyFcn() = default;

  // channels = {3, hidden..., num_classes}; e.g. {3, 16, 16, 4}.
  // He-initialized from the seed (biases zero); deterministic across
  // platforms.
  TinyFcn(const std::vector<int>& channels, uint64_t seed);

  static TinyFcn default_shape(int num_classes, uint64_t seed) {
    return TinyFcn({3, 16, 16, num_classes}, seed);
  }

  int num_classes() const { return layers_.back().out_ch; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  int parameter_count() const;

  // Flat parameter vector (weights then bias, layer by layer); used by the
  // optimizer and by finite-difference checks.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  LogitGrid forward(const ImageU8& image) const;

  // Forward pass that keeps every layer input (x_0 = image / 255, then the
  // post-ReLU activations) for the backward pass.
  struct ForwardCache {
    std::vector<Tensor> inputs;  // one per layer
  };
  LogitGrid forward_cached(const ImageU8& image, ForwardCache& cache) const;

  struct Gradients {
    std::vector<std::vector<double>> w;  // per layer, same shape as Layer::w
    std::vector<std::vector<double>> b;

    void accumulate(const Gradients& other, double scale);
    void scale(double s);
  };
  Gradients zero_gradients() const;

  // d loss / d parameters given d loss / d logits.
  Gradients backward(const ForwardCache& cache,
                     const LogitGrid& grad_logits) const;

  // Binary checkpoint: magic "TFCN", version, layer count, then per layer
  // (in_ch, out_ch, kernel size, weights, biases), little-endian.
  void save(const std::filesystem::path& path) const;
  static TinyFcn load(const std::filesystem::path& path);

 private:
  std::vector<Layer> layers_;
};

// SGD with classical momentum and decoupled L2 weight decay:
//   v <- momentum * v - lr * (grad + weight_decay * w);  w <- w + v.
class SgdOptimizer {
 public:
  SgdOptimizer(double momentum, double weight_decay)
      : momentum_(momentum), weight_decay_(weight_decay) {}

  void step(TinyFcn& model, const TinyFcn::Gradients& grads, double lr);

 private:
  double momentum_ = 0.9;
  double weight_decay_ = 5e-5;
  TinyFcn::Gradients velocity_;
  bool initialized_ = false;
};

}  // namespace weakseg
