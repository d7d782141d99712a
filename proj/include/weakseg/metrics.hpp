#pragma once

#include <vector>

#include "weakseg/image.hpp"

namespace weakseg {

struct IouReport {
  std::vector<double> per_class;  // IoU per class; meaningless if !defined
  std::vector<bool> defined;      // false when the class is absent from both
                                  // prediction and ground truth
  double mean = 0.0;              // mean over defined classes only
};

// Intersection-over-union per class and its mean. Classes absent from both
// masks are excluded from the mean rather than counted as 1.
IouReport miou(const MaskU8& prediction, const MaskU8& ground_truth,
               int num_classes);

// Dataset-level accumulator: per-class intersections and unions are summed
// over many mask pairs before the final division.
class IouAccumulator {
 public:
  explicit IouAccumulator(int num_classes)
      : intersection_(num_classes, 0), union_(num_classes, 0) {}

  void add(const MaskU8& prediction, const MaskU8& ground_truth);
  IouReport report() const;

 private:
  std::vector<long long> intersection_;
  std::vector<long long> union_;
};

}  // namespace weakseg
