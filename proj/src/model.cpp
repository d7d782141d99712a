#include "weakseg/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "weakseg/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace weakseg {

namespace {

// out += conv3x3(in, w) for one (out plane, in plane, kernel) triple; the
// inner loop is contiguous over x so it vectorizes.
void conv_accumulate(const double* in, double* out, const double* w9, int H,
                     int W) {
  for (int ky = 0; ky < 3; ++ky) {
    for (int kx = 0; kx < 3; ++kx) {
      const double wv = w9[ky * 3 + kx];
      const int dy = ky - 1;
      const int dx = kx - 1;
      const int y0 = std::max(0, -dy);
      const int y1 = std::min(H, H - dy);
      const int x0 = std::max(0, -dx);
      const int x1 = std::min(W, W - dx);
      for (int y = y0; y < y1; ++y) {
        const double* irow = in + static_cast<size_t>(y + dy) * W + dx;
        double* orow = out + static_cast<size_t>(y) * W;
        for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
      }
    }
  }
}

// gw9 += correlation of delta (output plane) with in (input plane).
void conv_weight_grad(const double* in, const double* delta, double* gw9,
                      int H, int W) {
  for (int ky = 0; ky < 3; ++ky) {
    for (int kx = 0; kx < 3; ++kx) {
      const int dy = ky - 1;
      const int dx = kx - 1;
      const int y0 = std::max(0, -dy);
      const int y1 = std::min(H, H - dy);
      const int x0 = std::max(0, -dx);
      const int x1 = std::min(W, W - dx);
      double acc = 0.0;
      for (int y = y0; y < y1; ++y) {
        const double* irow = in + static_cast<size_t>(y + dy) * W + dx;
        const double* drow = delta + static_cast<size_t>(y) * W;
        for (int x = x0; x < x1; ++x) acc += drow[x] * irow[x];
      }
      gw9[ky * 3 + kx] += acc;
    }
  }
}

// gin += conv-transpose of delta with the same kernel (scatter with the
// forward index ranges).
void conv_input_grad(const double* delta, double* gin, const double* w9, int H,
                     int W) {
  for (int ky = 0; ky < 3; ++ky) {
    for (int kx = 0; kx < 3; ++kx) {
      const double wv = w9[ky * 3 + kx];
      const int dy = ky - 1;
      const int dx = kx - 1;
      const int y0 = std::max(0, -dy);
      const int y1 = std::min(H, H - dy);
      const int x0 = std::max(0, -dx);
      const int x1 = std::min(W, W - dx);
      for (int y = y0; y < y1; ++y) {
        double* grow = gin + static_cast<size_t>(y + dy) * W + dx;
        const double* drow = delta + static_cast<size_t>(y) * W;
        for (int x = x0; x < x1; ++x) grow[x] += wv * drow[x];
      }
    }
  }
}

Tensor image_to_tensor(const ImageU8& image) {
  Tensor t(3, image.height, image.width);
  const int n = image.pixels();
  for (int c = 0; c < 3; ++c) {
    double* plane = t.plane(c);
    for (int p = 0; p < n; ++p) {
      plane[p] = image.rgb[static_cast<size_t>(p) * 3 + c] / 255.0;
    }
  }
  return t;
}

}  // namespace

TinyFcn::TinyFcn(const std::vector<int>& channels, uint64_t seed) {
  if (channels.size() < 2) {
    throw std::invalid_argument("TinyFcn: need at least one layer");
  }
  if (channels.front() != 3) {
    throw std::invalid_argument("TinyFcn: input must have 3 channels");
  }
  for (int c : channels) {
    if (c < 1) throw std::invalid_argument("TinyFcn: bad channel count");
  }
  if (channels.back() < 2) {
    throw std::invalid_argument("TinyFcn: need at least 2 output classes");
  }

  Rng rng(seed);
  for (size_t i = 0; i + 1 < channels.size(); ++i) {
    Layer layer;
    layer.in_ch = channels[i];
    layer.out_ch = channels[i + 1];
    layer.w.resize(static_cast<size_t>(layer.out_ch) * layer.in_ch * 9);
    layer.b.assign(layer.out_ch, 0.0);
    // He initialization for ReLU stacks.
    const double std_dev = std::sqrt(2.0 / (layer.in_ch * 9));
    for (double& w : layer.w) w = std_dev * rng.normal();
    layers_.push_back(std::move(layer));
  }
  if (parameter_count() >= 100000) {
    throw std::invalid_argument("TinyFcn: parameter budget is < 1e5");
  }
}

int TinyFcn::parameter_count() const {
  int count = 0;
  for (const Layer& layer : layers_) {
    count += static_cast<int>(layer.w.size() + layer.b.size());
  }
  return count;
}

std::vector<double> TinyFcn::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Layer& layer : layers_) {
    flat.insert(flat.end(), layer.w.begin(), layer.w.end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

void TinyFcn::set_parameters(std::span<const double> flat) {
  if (static_cast<int>(flat.size()) != parameter_count()) {
    throw std::invalid_argument("TinyFcn: parameter vector size mismatch");
  }
  size_t pos = 0;
  for (Layer& layer : layers_) {
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.w.size(),
              layer.w.begin());
    pos += layer.w.size();
    std::copy(flat.begin() + pos, flat.begin() + pos + layer.b.size(),
              layer.b.begin());
    pos += layer.b.size();
  }
}

LogitGrid TinyFcn::forward(const ImageU8& image) const {
  ForwardCache cache;
  return forward_cached(image, cache);
}

LogitGrid TinyFcn::forward_cached(const ImageU8& image,
                                  ForwardCache& cache) const {
  if (layers_.empty()) throw std::logic_error("TinyFcn: uninitialized model");
  const int H = image.height;
  const int W = image.width;

  cache.inputs.clear();
  cache.inputs.reserve(layers_.size());
  cache.inputs.push_back(image_to_tensor(image));

  Tensor out;
  for (size_t k = 0; k < layers_.size(); ++k) {
    const Layer& layer = layers_[k];
    const Tensor& in = cache.inputs.back();
    out = Tensor(layer.out_ch, H, W);
    for (int oc = 0; oc < layer.out_ch; ++oc) {
      double* plane = out.plane(oc);
      const double b = layer.b[oc];
      for (int p = 0; p < H * W; ++p) plane[p] = b;
      for (int ic = 0; ic < layer.in_ch; ++ic) {
        const double* w9 =
            layer.w.data() + (static_cast<size_t>(oc) * layer.in_ch + ic) * 9;
        conv_accumulate(in.plane(ic), plane, w9, H, W);
      }
    }
    if (k + 1 < layers_.size()) {
      for (double& v : out.v) v = std::max(v, 0.0);
      cache.inputs.push_back(out);  // post-ReLU input of the next layer
    }
  }

  // Channel-major logits to pixel-major grid.
  LogitGrid logits(H, W, layers_.back().out_ch);
  for (int c = 0; c < logits.channels(); ++c) {
    const double* plane = out.plane(c);
    for (int p = 0; p < H * W; ++p) logits(p, c) = plane[p];
  }
  return logits;
}

TinyFcn::Gradients TinyFcn::zero_gradients() const {
  Gradients g;
  g.w.reserve(layers_.size());
  g.b.reserve(layers_.size());
  for (const Layer& layer : layers_) {
    g.w.emplace_back(layer.w.size(), 0.0);
    g.b.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

void TinyFcn::Gradients::accumulate(const Gradients& other, double scale) {
  for (size_t k = 0; k < w.size(); ++k) {
    for (size_t i = 0; i < w[k].size(); ++i) w[k][i] += scale * other.w[k][i];
    for (size_t i = 0; i < b[k].size(); ++i) b[k][i] += scale * other.b[k][i];
  }
}

void TinyFcn::Gradients::scale(double s) {
  for (auto& layer : w) {
    for (double& v : layer) v *= s;
  }
  for (auto& layer : b) {
    for (double& v : layer) v *= s;
  }
}

TinyFcn::Gradients TinyFcn::backward(const ForwardCache& cache,
                                     const LogitGrid& grad_logits) const {
  if (cache.inputs.size() != layers_.size()) {
    throw std::invalid_argument("TinyFcn::backward: stale forward cache");
  }
  const int H = cache.inputs[0].height;
  const int W = cache.inputs[0].width;
  if (grad_logits.height() != H || grad_logits.width() != W ||
      grad_logits.channels() != layers_.back().out_ch) {
    throw std::invalid_argument("TinyFcn::backward: grad shape mismatch");
  }

  Gradients grads = zero_gradients();

  // delta = d loss / d (pre-activation output of layer k).
  Tensor delta(layers_.back().out_ch, H, W);
  for (int c = 0; c < delta.channels; ++c) {
    double* plane = delta.plane(c);
    for (int p = 0; p < H * W; ++p) plane[p] = grad_logits(p, c);
  }

  for (int k = static_cast<int>(layers_.size()) - 1; k >= 0; --k) {
    const Layer& layer = layers_[k];
    const Tensor& in = cache.inputs[k];

    for (int oc = 0; oc < layer.out_ch; ++oc) {
      const double* dplane = delta.plane(oc);
      double acc = 0.0;
      for (int p = 0; p < H * W; ++p) acc += dplane[p];
      grads.b[k][oc] = acc;
      for (int ic = 0; ic < layer.in_ch; ++ic) {
        double* gw9 =
            grads.w[k].data() + (static_cast<size_t>(oc) * layer.in_ch + ic) * 9;
        conv_weight_grad(in.plane(ic), dplane, gw9, H, W);
      }
    }

    if (k == 0) break;

    Tensor prev_delta(layer.in_ch, H, W, 0.0);
    for (int oc = 0; oc < layer.out_ch; ++oc) {
      const double* dplane = delta.plane(oc);
      for (int ic = 0; ic < layer.in_ch; ++ic) {
        const double* w9 =
            layer.w.data() + (static_cast<size_t>(oc) * layer.in_ch + ic) * 9;
        conv_input_grad(dplane, prev_delta.plane(ic), w9, H, W);
      }
    }
    // ReLU mask: layer k's input is the post-ReLU output of layer k-1.
    const Tensor& mask = cache.inputs[k];
    for (size_t i = 0; i < prev_delta.v.size(); ++i) {
      if (mask.v[i] <= 0.0) prev_delta.v[i] = 0.0;
    }
    delta = std::move(prev_delta);
  }
  return grads;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T* data, size_t count) {
  out.write(reinterpret_cast<const char*>(data), count * sizeof(T));
}

template <typename T>
void read_raw(std::ifstream& in, T* data, size_t count) {
  in.read(reinterpret_cast<char*>(data), count * sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: unexpected end of file");
}

}  // namespace

void TinyFcn::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("checkpoint: cannot open " + path.string() +
                             " for writing");
  }
  out.write("TFCN", 4);
  const uint32_t version = kCheckpointVersion;
  const uint32_t count = static_cast<uint32_t>(layers_.size());
  write_raw(out, &version, 1);
  write_raw(out, &count, 1);
  for (const Layer& layer : layers_) {
    const uint32_t in_ch = layer.in_ch;
    const uint32_t out_ch = layer.out_ch;
    const uint32_t kernel = kKernelSize;
    write_raw(out, &in_ch, 1);
    write_raw(out, &out_ch, 1);
    write_raw(out, &kernel, 1);
    write_raw(out, layer.w.data(), layer.w.size());
    write_raw(out, layer.b.data(), layer.b.size());
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

TinyFcn TinyFcn::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("checkpoint: cannot open " + path.string());
  }
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "TFCN", 4) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  uint32_t version = 0, count = 0;
  read_raw(in, &version, 1);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  }
  read_raw(in, &count, 1);
  if (count == 0 || count > 64) {
    throw std::runtime_error("checkpoint: implausible layer count");
  }

  TinyFcn model;
  for (uint32_t k = 0; k < count; ++k) {
    uint32_t in_ch = 0, out_ch = 0, kernel = 0;
    read_raw(in, &in_ch, 1);
    read_raw(in, &out_ch, 1);
    read_raw(in, &kernel, 1);
    if (kernel != kKernelSize || in_ch == 0 || out_ch == 0 || in_ch > 4096 ||
        out_ch > 4096) {
      throw std::runtime_error("checkpoint: bad layer header");
    }
    Layer layer;
    layer.in_ch = static_cast<int>(in_ch);
    layer.out_ch = static_cast<int>(out_ch);
    layer.w.resize(static_cast<size_t>(in_ch) * out_ch * 9);
    layer.b.resize(out_ch);
    read_raw(in, layer.w.data(), layer.w.size());
    read_raw(in, layer.b.data(), layer.b.size());
    model.layers_.push_back(std::move(layer));
  }
  return model;
}

void SgdOptimizer::step(TinyFcn& model, const TinyFcn::Gradients& grads,
                        double lr) {
  if (!initialized_) {
    velocity_ = model.zero_gradients();
    initialized_ = true;
  }
  auto& layers = model.layers();
  for (size_t k = 0; k < layers.size(); ++k) {
    auto& layer = layers[k];
    for (size_t i = 0; i < layer.w.size(); ++i) {
      double& v = velocity_.w[k][i];
      v = momentum_ * v - lr * (grads.w[k][i] + weight_decay_ * layer.w[i]);
      layer.w[i] += v;
    }
    for (size_t i = 0; i < layer.b.size(); ++i) {
      double& v = velocity_.b[k][i];
      v = momentum_ * v - lr * (grads.b[k][i] + weight_decay_ * layer.b[i]);
      layer.b[i] += v;
    }
  }
}

}  // namespace weakseg
