#include "weakseg/train.hpp"

#include <cmath>
#include <memory>

#include "weakseg/rng.hpp"

namespace weakseg {

double lr_at_step(const TrainConfig& config, int step) {
  const int halvings = step / config.halve_every;
  return config.lr * std::pow(2.0, -halvings);
}

MaskU8 predict_mask(const TinyFcn& model, const ImageU8& image) {
  const LogitGrid logits = model.forward(image);
  MaskU8 mask(image.height, image.width);
  for (int p = 0; p < logits.pixels(); ++p) {
    const double* f = logits.pixel(p);
    int best = 0;
    for (int c = 1; c < logits.channels(); ++c) {
      if (f[c] > f[best]) best = c;
    }
    mask.labels[p] = static_cast<uint8_t>(best);
  }
  return mask;
}

IouReport evaluate_model(const TinyFcn& model, const SceneDataset& data) {
  if (data.scenes.empty()) {
    throw std::invalid_argument("evaluate_model: empty dataset");
  }
  IouAccumulator acc(data.num_classes);
  for (const SyntheticScene& scene : data.scenes) {
    acc.add(predict_mask(model, scene.image), scene.gt_mask);
  }
  return acc.report();
}

TrainLog train_model(TinyFcn& model, const SceneDataset& train_data,
                     const SceneDataset* val_data, const TrainConfig& config,
                     const LossConfig& loss_config, const KernelParams& kernel,
                     const PriorConstraints& constraints, int prior_grid_size,
                     const std::function<void(const TrainStepLog&)>& progress) {
  config.validate();
  kernel.validate();
  if (train_data.scenes.empty()) {
    throw std::invalid_argument("train_model: empty training set");
  }
  if (model.num_classes() != train_data.num_classes) {
    throw std::invalid_argument(
        "train_model: model classes != dataset classes");
  }

  // Per-scene filters are field-independent, so build each once. The
  // neighborhood term never touches them when lambda == 0.
  const int n = static_cast<int>(train_data.scenes.size());
  std::vector<std::unique_ptr<DenseKernelFilter>> filters(n);
  auto filter_for = [&](int idx) -> const DenseKernelFilter& {
    if (!filters[idx]) {
      const ImageU8& image = train_data.scenes[idx].image;
      FeatureImage feat = FeatureImage::from_image(image);
      filters[idx] = std::make_unique<DenseKernelFilter>(
          kernel, feat, DenseKernelFilter::auto_backend(feat.pixels()));
    }
    return *filters[idx];
  };

  SgdOptimizer optimizer(config.momentum, config.weight_decay);
  Rng rng(config.seed);
  TrainLog log;
  log.steps.reserve(config.total_steps);

  for (int step = 0; step < config.total_steps; ++step) {
    TinyFcn::Gradients batch_grads = model.zero_gradients();
    double class_loss = 0.0;
    double neighb_loss = 0.0;
    double total = 0.0;

    for (int b = 0; b < config.batch_size; ++b) {
      const int idx = rng.uniform_int(n);
      const SyntheticScene& scene = train_data.scenes[idx];

      TinyFcn::ForwardCache cache;
      const LogitGrid logits = model.forward_cached(scene.image, cache);
      LossReport report;
      if (loss_config.lambda != 0.0) {
        report = total_loss_and_grad(loss_config, filter_for(idx), logits,
                                     scene.labels, constraints,
                                     prior_grid_size);
      } else {
        // Skip filter construction entirely for pure-classification runs.
        LossConfig no_neighb = loss_config;
        no_neighb.lambda = 0.0;
        report = total_loss_and_grad(no_neighb, kernel,
                                     FeatureImage::from_image(scene.image),
                                     logits, scene.labels, constraints,
                                     prior_grid_size);
      }

      // Updates use per-pixel-mean gradients regardless of how the losses
      // are reported; see the header note on resolution independence.
      if (!loss_config.normalize_per_pixel) {
        const double scale = 1.0 / report.pixel_count;
        for (double& g : report.grad.raw()) g *= scale;
      }

      const TinyFcn::Gradients grads = model.backward(cache, report.grad);
      batch_grads.accumulate(grads, 1.0 / config.batch_size);
      class_loss += report.class_loss / config.batch_size;
      neighb_loss += report.neighb_loss / config.batch_size;
      total += report.total / config.batch_size;
    }

    const double lr = lr_at_step(config, step);
    optimizer.step(model, batch_grads, lr);

    TrainStepLog step_log{step, class_loss, neighb_loss, total, lr};
    log.steps.push_back(step_log);
    if (progress) progress(step_log);

    if (val_data && config.eval_every > 0 &&
        (step + 1) % config.eval_every == 0) {
      log.evals.push_back({step + 1, evaluate_model(model, *val_data).mean});
    }
  }

  if (val_data) {
    log.evals.push_back(
        {config.total_steps, evaluate_model(model, *val_data).mean});
  }
  return log;
}

}  // namespace weakseg
