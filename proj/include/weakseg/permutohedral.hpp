#pragma once

#include <vector>

namespace weakseg {

// Permutohedral lattice for approximate high-dimensional Gaussian filtering
// (splat -> blur -> slice). Given unit-bandwidth features f_p (the caller
// divides by theta), compute() approximates
//   out_p = sum_q exp(-|f_p - f_q|^2 / 2) * in_q
// including the q = p term. Double precision throughout.
//
// Deviations from the textbook lattice, needed because callers compare raw
// kernel sums (not kernel-normalized averages) against the exact filter:
//  - the slice scale is chosen so the operator's integral response equals
//    that of the unit Gaussian exactly, removing the systematic DC bias of
//    the usual 1/(1+2^-d) constant;
//  - `passes` blur sweeps per axis (with the feature scaling adjusted to
//    keep the total bandwidth at 1) shrink the lattice cell relative to the
//    Gaussian, cutting quantization wobble and support truncation;
//  - the vertex set is closed under the blur stencil, so mass is never
//    dropped at sparsely populated regions of feature space;
//  - the exact q = p response is available per point (self_response), so
//    callers can remove the center tap exactly.
class PermutohedralLattice {
 public:
  // features: point-major, dim entries per point.
  PermutohedralLattice(const std::vector<double>& features, int dim, int count,
                       int passes = 1);

  // in/out: point-major, `channels` entries per point. transpose reverses
  // the blur order, giving the exact transpose of the linear operator.
  void compute(const double* in, double* out, int channels,
               bool transpose = false) const;

  // Exact weight this lattice gives point p's own value in compute() output
  // at p (the q = p center tap).
  double self_response(int p) const { return self_[p]; }

  int point_count() const { return n_; }
  int lattice_point_count() const { return m_; }

 private:
  int n_ = 0;       // number of input points
  int d_ = 0;       // feature dimension
  int m_ = 0;       // number of occupied lattice points
  int passes_ = 1;  // blur sweeps per lattice axis
  double alpha_ = 1.0;  // slice scale (unit integral response)

  // Splat/slice tables: for each point, d_+1 enclosing lattice vertices.
  std::vector<int> offset_;          // n_ * (d_+1), lattice point index
  std::vector<double> barycentric_;  // n_ * (d_+1)
  std::vector<double> self_;         // n_

  // Blur neighbors per axis: index of lattice point +/- 1 step along each of
  // the d_+1 lattice directions, -1 when absent.
  std::vector<int> blur_n1_;  // (d_+1) * m_
  std::vector<int> blur_n2_;  // (d_+1) * m_
};

}  // namespace weakseg
