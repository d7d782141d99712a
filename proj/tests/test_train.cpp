#include <numeric>

#include "doctest.h"
#include "test_util.hpp"
#include "weakseg/train.hpp"

using namespace weakseg;

namespace {

SceneDataset tiny_dataset(int count, uint64_t seed, int size = 16) {
  SceneDataset ds;
  ds.num_classes = 3;
  for (int i = 0; i < count; ++i) {
    ds.scenes.push_back(
        testutil::small_scene(split_seed(seed, i), size, 3, 1 + (i % 2)));
  }
  return ds;
}

double mean_of(const std::vector<TrainStepLog>& steps, size_t from, size_t to) {
  double sum = 0.0;
  for (size_t i = from; i < to; ++i) sum += steps[i].total;
  return sum / (to - from);
}

}  // namespace

TEST_CASE("the learning rate halves on schedule") {
  TrainConfig config;
  config.lr = 0.02;
  config.halve_every = 100;
  CHECK(lr_at_step(config, 0) == 0.02);
  CHECK(lr_at_step(config, 99) == 0.02);
  CHECK(lr_at_step(config, 100) == 0.01);
  CHECK(lr_at_step(config, 199) == 0.01);
  CHECK(lr_at_step(config, 200) == 0.005);
}

TEST_CASE("train config validation") {
  TrainConfig config;
  config.lr = 0.0;
  CHECK_THROWS(config.validate());
  config = TrainConfig{};
  config.batch_size = 0;
  CHECK_THROWS(config.validate());
  config = TrainConfig{};
  config.halve_every = 0;
  CHECK_THROWS(config.validate());
}

TEST_CASE("a short classification-only run decreases the loss") {
  const SceneDataset train = tiny_dataset(6, 1001);
  TinyFcn model = TinyFcn::default_shape(3, 5);

  TrainConfig config;
  config.total_steps = 80;
  config.batch_size = 2;
  config.seed = 11;
  LossConfig loss;
  loss.lambda = 0.0;

  const TrainLog log = train_model(model, train, nullptr, config, loss,
                                   KernelParams{}, PriorConstraints());
  REQUIRE(log.steps.size() == 80);
  CHECK(log.steps.front().lr == 0.01);
  for (const TrainStepLog& s : log.steps) {
    CHECK(s.neighb_loss == 0.0);
    CHECK(std::isfinite(s.total));
  }
  CHECK(mean_of(log.steps, 70, 80) < 0.6 * mean_of(log.steps, 0, 10));
}

TEST_CASE("training is deterministic in its seeds") {
  const SceneDataset train = tiny_dataset(4, 1002);
  TrainConfig config;
  config.total_steps = 12;
  config.batch_size = 2;
  LossConfig loss;
  loss.lambda = 0.1;

  TinyFcn a = TinyFcn::default_shape(3, 9);
  TinyFcn b = TinyFcn::default_shape(3, 9);
  train_model(a, train, nullptr, config, loss, KernelParams{}, PriorConstraints());
  train_model(b, train, nullptr, config, loss, KernelParams{}, PriorConstraints());
  CHECK(a.parameters() == b.parameters());
}

TEST_CASE("validation evaluations land on the requested schedule") {
  const SceneDataset train = tiny_dataset(4, 1003);
  const SceneDataset val = tiny_dataset(2, 1004);

  TrainConfig config;
  config.total_steps = 30;
  config.batch_size = 2;
  config.eval_every = 10;
  LossConfig loss;
  loss.lambda = 0.0;

  TinyFcn model = TinyFcn::default_shape(3, 2);
  const TrainLog log = train_model(model, train, &val, config, loss,
                                   KernelParams{}, PriorConstraints());
  REQUIRE(!log.evals.empty());
  CHECK(log.evals.front().step == 10);
  CHECK(log.evals.back().step == 30);
  for (const TrainEvalLog& e : log.evals) {
    CHECK(e.miou >= 0.0);
    CHECK(e.miou <= 1.0);
  }
}

TEST_CASE("prediction and evaluation have consistent shapes") {
  const SceneDataset data = tiny_dataset(3, 1005, 12);
  const TinyFcn model = TinyFcn::default_shape(3, 4);

  const MaskU8 mask = predict_mask(model, data.scenes[0].image);
  CHECK(mask.height == 12);
  CHECK(mask.width == 12);
  for (uint8_t l : mask.labels) CHECK(l < 3);

  const IouReport rep = evaluate_model(model, data);
  CHECK(rep.per_class.size() == 3);
  CHECK(rep.mean >= 0.0);
  CHECK(rep.mean <= 1.0);
}
