#pragma once

#include <map>
#include <vector>

#include "weakseg/distribution.hpp"

namespace weakseg {

// Per-label minimum mean-mass fractions for the auxiliary distribution.
// Background (label 0) and foreground default to one value each; individual
// labels can be overridden. Validation requires the constraints of the
// present labels to sum to <= 1, otherwise they are jointly infeasible by
// construction.
class PriorConstraints {
 public:
  PriorConstraints() = default;
  PriorConstraints(double background, double foreground)
      : background_(background), foreground_(foreground) {}

  double c(int label) const {
    auto it = overrides_.find(label);
    if (it != overrides_.end()) return it->second;
    return label == 0 ? background_ : foreground_;
  }

  void set(int label, double value) { overrides_[label] = value; }

  void validate(const LabelSet& labels) const {
    double sum = 0.0;
    for (int l : labels.present()) {
      const double cl = c(l);
      if (cl < 0.0 || cl > 1.0) {
        throw std::invalid_argument("PriorConstraints: c outside [0, 1]");
      }
      sum += cl;
    }
    if (sum > 1.0 + 1e-12) {
      throw std::invalid_argument(
          "PriorConstraints: constraints on present labels sum to > 1");
    }
  }

 private:
  double background_ = 0.4;
  double foreground_ = 0.2;
  std::map<int, double> overrides_;
};

struct PriorSolution {
  std::vector<double> beta;       // size num_classes; 0 for absent labels
  bool feasible = false;
  double objective = 0.0;         // sum over present labels of beta log beta
  double hinge = 0.0;             // sum of constraint shortfalls (0 if feasible)
  std::vector<double> mean_mass;  // achieved mean masses, size num_classes
};

// Reweight p by beta over the present labels and renormalize per pixel:
// q_i(l) ∝ p_i(l) * beta_l for present l, exactly 0 for absent labels.
// p is floored first so denominators are always positive.
DistributionGrid apply_prior(const DistributionGrid& p,
                             const std::vector<double>& beta,
                             const LabelSet& labels);

// Entropy-maximizing mixture weights for one background + one foreground
// label. Scans beta in {k/(grid_size+1), k=1..grid_size}, keeps feasible
// points (mean masses >= constraints) and returns the one minimizing
// beta log beta + (1-beta) log(1-beta); falls back to the hinge criterion
// when no grid point is feasible. The scan is implemented as a bisection
// over the grid (the foreground mean mass is monotone in beta) and returns
// exactly the grid point an exhaustive scan would.
PriorSolution solve_prior_two_class(const DistributionGrid& p,
                                    const LabelSet& labels,
                                    const PriorConstraints& constraints,
                                    int grid_size);

// Hinge fallback: over the same grid, minimize
// sum_l max(0, c_l - mean_mass_l(beta)); marks the result infeasible.
PriorSolution solve_prior_fallback(const DistributionGrid& p,
                                   const LabelSet& labels,
                                   const PriorConstraints& constraints,
                                   int grid_size);

// Coordinate descent for >= 2 foreground labels: repeatedly re-solves
// (beta_l, beta_0) pairs on the shared grid holding the rest fixed, until
// the objective changes by < 1e-8 or 100 sweeps. Returns the best feasible
// point seen, else the best hinge point. Reduces exactly to the two-class
// solver when only one foreground label is present.
PriorSolution solve_prior_multi(const DistributionGrid& p,
                                const LabelSet& labels,
                                const PriorConstraints& constraints,
                                int grid_size);

// Dispatch: two_class for one foreground label, multi otherwise.
PriorSolution solve_prior(const DistributionGrid& p, const LabelSet& labels,
                          const PriorConstraints& constraints,
                          int grid_size = 1001);

}  // namespace weakseg
