#include "weakseg/metrics.hpp"

#include <stdexcept>

namespace weakseg {

namespace {

void check_pair(const MaskU8& prediction, const MaskU8& ground_truth) {
  if (prediction.height != ground_truth.height ||
      prediction.width != ground_truth.width) {
    throw std::invalid_argument("miou: mask shape mismatch");
  }
}

IouReport report_from_counts(const std::vector<long long>& intersection,
                             const std::vector<long long>& union_counts) {
  const int num_classes = static_cast<int>(intersection.size());
  IouReport report;
  report.per_class.assign(num_classes, 0.0);
  report.defined.assign(num_classes, false);
  double sum = 0.0;
  int defined = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (union_counts[c] == 0) continue;  // absent from both: excluded
    report.defined[c] = true;
    report.per_class[c] =
        static_cast<double>(intersection[c]) / union_counts[c];
    sum += report.per_class[c];
    ++defined;
  }
  report.mean = defined > 0 ? sum / defined : 0.0;
  return report;
}

}  // namespace

IouReport miou(const MaskU8& prediction, const MaskU8& ground_truth,
               int num_classes) {
  if (num_classes < 1) {
    throw std::invalid_argument("miou: num_classes must be >= 1");
  }
  IouAccumulator acc(num_classes);
  check_pair(prediction, ground_truth);
  acc.add(prediction, ground_truth);
  return acc.report();
}

void IouAccumulator::add(const MaskU8& prediction, const MaskU8& ground_truth) {
  check_pair(prediction, ground_truth);
  const int num_classes = static_cast<int>(intersection_.size());
  for (int p = 0; p < prediction.pixels(); ++p) {
    const int a = prediction.labels[p];
    const int b = ground_truth.labels[p];
    if (a >= num_classes || b >= num_classes) {
      throw std::invalid_argument("miou: label exceeds num_classes");
    }
    if (a == b) {
      ++intersection_[a];
      ++union_[a];
    } else {
      ++union_[a];
      ++union_[b];
    }
  }
}

IouReport IouAccumulator::report() const {
  return report_from_counts(intersection_, union_);
}

}  // namespace weakseg
