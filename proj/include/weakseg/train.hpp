#pragma once

#include <functional>
#include <optional>

#include "weakseg/losses.hpp"
#include "weakseg/metrics.hpp"
#include "weakseg/model.hpp"
#include "weakseg/synth.hpp"

namespace weakseg {

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-5;
  int halve_every = 400;  // lr halves every this many steps
  int total_steps = 2000;
  int batch_size = 4;
  uint64_t seed = 1;
  int eval_every = 0;  // 0 = only a final evaluation (when val data given)

  void validate() const {
    if (lr <= 0.0) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (batch_size < 1) {
      throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    }
    if (total_steps < 0 || halve_every < 1) {
      throw std::invalid_argument("TrainConfig: bad step counts");
    }
  }
};

// Stepwise halving: lr(step) = lr * 2^(-floor(step / halve_every)).
double lr_at_step(const TrainConfig& config, int step);

struct TrainStepLog {
  int step = 0;
  double class_loss = 0.0;
  double neighb_loss = 0.0;
  double total = 0.0;
  double lr = 0.0;
};

struct TrainEvalLog {
  int step = 0;
  double miou = 0.0;
};

struct TrainLog {
  std::vector<TrainStepLog> steps;
  std::vector<TrainEvalLog> evals;
};

// Mini-batch SGD over the dataset. Per-image kernel filters are built once
// and cached; batches are drawn from the seed stream, gradients averaged
// over the batch. Parameter updates always consume per-pixel-mean gradients
// (the per-image gradient is divided by the pixel count when the loss config
// reports pixel sums), so the step size is resolution-independent and
// loss_config.normalize_per_pixel only selects the units of the logged
// losses. Runs on one thread (deterministic for a fixed seed).
// progress, when set, is called once per step (for CLI reporting).
TrainLog train_model(TinyFcn& model, const SceneDataset& train_data,
                     const SceneDataset* val_data, const TrainConfig& config,
                     const LossConfig& loss_config, const KernelParams& kernel,
                     const PriorConstraints& constraints,
                     int prior_grid_size = 1001,
                     const std::function<void(const TrainStepLog&)>& progress = {});

// Argmax prediction for one image.
MaskU8 predict_mask(const TinyFcn& model, const ImageU8& image);

// Dataset mIoU of argmax predictions (global accumulation over scenes).
IouReport evaluate_model(const TinyFcn& model, const SceneDataset& data);

}  // namespace weakseg
