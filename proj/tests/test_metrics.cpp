#include "doctest.h"
#include "weakseg/metrics.hpp"

using namespace weakseg;

namespace {

MaskU8 mask_of(int height, int width, std::vector<uint8_t> labels) {
  MaskU8 m(height, width);
  m.labels = std::move(labels);
  return m;
}

}  // namespace

TEST_CASE("iou on a hand-counted pair of masks") {
  // 2x3 grid, 3 classes.
  //   gt:   0 0 1      pred: 0 1 1
  //         1 2 2            1 2 0
  const MaskU8 gt = mask_of(2, 3, {0, 0, 1, 1, 2, 2});
  const MaskU8 pred = mask_of(2, 3, {0, 1, 1, 1, 2, 0});

  const IouReport rep = miou(pred, gt, 3);
  REQUIRE(rep.per_class.size() == 3);
  // Class 0: intersection {p0}, union {p0, p1, p5} -> 1/3.
  CHECK(rep.per_class[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Class 1: intersection {p2, p3}, union {p1, p2, p3} -> 2/3.
  CHECK(rep.per_class[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // Class 2: intersection {p4}, union {p4, p5} -> 1/2.
  CHECK(rep.per_class[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.defined == std::vector<bool>{true, true, true});
  CHECK(rep.mean ==
        doctest::Approx((1.0 / 3.0 + 2.0 / 3.0 + 0.5) / 3.0).epsilon(1e-12));
}

TEST_CASE("identical masks score a perfect mean") {
  const MaskU8 m = mask_of(2, 2, {0, 1, 1, 2});
  const IouReport rep = miou(m, m, 4);
  CHECK(rep.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.defined == std::vector<bool>{true, true, true, false});
}

TEST_CASE("classes absent from both masks are excluded from the mean") {
  const MaskU8 gt = mask_of(1, 4, {0, 0, 1, 1});
  const MaskU8 pred = mask_of(1, 4, {0, 1, 1, 1});
  const IouReport rep = miou(pred, gt, 4);

  CHECK(rep.defined[0]);
  CHECK(rep.defined[1]);
  CHECK(!rep.defined[2]);
  CHECK(!rep.defined[3]);
  // Class 0: 1/2; class 1: 2/3; classes 2 and 3 ignored.
  CHECK(rep.mean == doctest::Approx((0.5 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("a class the prediction never emits still counts as zero") {
  const MaskU8 gt = mask_of(1, 3, {0, 2, 2});
  const MaskU8 pred = mask_of(1, 3, {0, 0, 0});
  const IouReport rep = miou(pred, gt, 3);
  CHECK(rep.per_class[2] == 0.0);
  CHECK(rep.defined[2]);
  CHECK(rep.mean == doctest::Approx((1.0 / 3.0 + 0.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("the accumulator pools counts across scenes before dividing") {
  IouAccumulator acc(2);
  // Scene A: class 1 intersection 1, union 2. Scene B: intersection 0, union 1.
  acc.add(mask_of(1, 2, {1, 1}), mask_of(1, 2, {1, 0}));
  acc.add(mask_of(1, 1, {0}), mask_of(1, 1, {1}));

  const IouReport rep = acc.report();
  // Pooled class 1: intersection 1, union 3 -> 1/3 (not the mean of 1/2 and 0).
  CHECK(rep.per_class[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("shape mismatches are rejected") {
  const MaskU8 a = mask_of(1, 2, {0, 1});
  const MaskU8 b = mask_of(2, 1, {0, 1});
  CHECK_THROWS(miou(a, b, 2));
  IouAccumulator acc(2);
  CHECK_THROWS(acc.add(a, b));
}
