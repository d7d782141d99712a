#include "weakseg/prior.hpp"

#include <cmath>

#include "weakseg/distribution.hpp"

namespace weakseg {

namespace {

double beta_at(int k, int grid_size) {
  return static_cast<double>(k) / (grid_size + 1.0);
}

// Negative entropy of a two-class mixture. Written exactly like this in the
// scan below so that fast-path and exhaustive evaluations produce identical
// doubles (tie-breaking depends on it).
double two_class_objective(double beta) {
  return beta * std::log(beta) + (1.0 - beta) * std::log(1.0 - beta);
}

void check_grid_size(int grid_size) {
  if (grid_size < 1) {
    throw std::invalid_argument("solve_prior: grid_size must be >= 1");
  }
}

// Flattened per-pixel (foreground, background) floored probabilities for the
// two-class solver.
struct TwoClassView {
  std::vector<double> fg;
  std::vector<double> bg;
  int fg_label = 0;
};

TwoClassView two_class_view(const DistributionGrid& p, const LabelSet& labels) {
  const DistributionGrid pf = floored(p);
  TwoClassView view;
  view.fg_label = labels.present()[1];
  view.fg.resize(pf.pixels());
  view.bg.resize(pf.pixels());
  for (int i = 0; i < pf.pixels(); ++i) {
    view.fg[i] = pf(i, view.fg_label);
    view.bg[i] = pf(i, 0);
  }
  return view;
}

// Mean foreground mass of q_aux at mixture weight beta. Ascending pixel
// order; the exhaustive oracle must sum in the same order to reproduce the
// exact double.
double mean_fg_mass(const TwoClassView& view, double beta) {
  double sum = 0.0;
  const size_t n = view.fg.size();
  for (size_t i = 0; i < n; ++i) {
    const double a = view.fg[i] * beta;
    const double b = view.bg[i] * (1.0 - beta);
    sum += a / (a + b);
  }
  return sum / static_cast<double>(n);
}

PriorSolution make_two_class_solution(const TwoClassView& view,
                                      const LabelSet& labels, double beta,
                                      bool feasible, double hinge) {
  PriorSolution sol;
  sol.beta.assign(labels.num_classes(), 0.0);
  sol.beta[view.fg_label] = beta;
  sol.beta[0] = 1.0 - beta;
  sol.feasible = feasible;
  sol.objective = two_class_objective(beta);
  sol.hinge = hinge;
  const double mass = mean_fg_mass(view, beta);
  sol.mean_mass.assign(labels.num_classes(), 0.0);
  sol.mean_mass[view.fg_label] = mass;
  sol.mean_mass[0] = 1.0 - mass;
  return sol;
}

}  // namespace

DistributionGrid apply_prior(const DistributionGrid& p,
                             const std::vector<double>& beta,
                             const LabelSet& labels) {
  if (static_cast<int>(beta.size()) != labels.num_classes()) {
    throw std::invalid_argument("apply_prior: beta size != num_classes");
  }
  if (p.channels() != labels.num_classes()) {
    throw std::invalid_argument("apply_prior: channel count != num_classes");
  }
  double beta_sum = 0.0;
  for (int l : labels.present()) {
    if (beta[l] < 0.0) {
      throw std::invalid_argument("apply_prior: negative beta");
    }
    beta_sum += beta[l];
  }
  if (std::abs(beta_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("apply_prior: beta must sum to 1 over present labels");
  }

  const DistributionGrid pf = floored(p);
  DistributionGrid out(p.height(), p.width(), p.channels(), 0.0);
  for (int i = 0; i < p.pixels(); ++i) {
    const double* src = pf.pixel(i);
    double* dst = out.pixel(i);
    double denom = 0.0;
    for (int l : labels.present()) denom += src[l] * beta[l];
    for (int l : labels.present()) dst[l] = src[l] * beta[l] / denom;
  }
  return out;
}

PriorSolution solve_prior_two_class(const DistributionGrid& p,
                                    const LabelSet& labels,
                                    const PriorConstraints& constraints,
                                    int grid_size) {
  check_grid_size(grid_size);
  constraints.validate(labels);
  if (labels.foreground_count() != 1) {
    throw std::invalid_argument(
        "solve_prior_two_class: exactly one foreground label required");
  }
  const TwoClassView view = two_class_view(p, labels);
  const double c_fg = constraints.c(view.fg_label);
  const double c_bg = constraints.c(0);

  // The mean foreground mass is nondecreasing in beta, so the feasible set
  // {k : mass(beta_k) >= c_fg and 1 - mass(beta_k) >= c_bg} is a contiguous
  // index range [k_lo, k_hi], found by bisection. A +/-2 linear refinement
  // guards the boundaries so the result matches an exhaustive scan exactly.
  const int G = grid_size;
  auto fg_ok = [&](int k) { return mean_fg_mass(view, beta_at(k, G)) >= c_fg; };
  auto bg_ok = [&](int k) {
    return 1.0 - mean_fg_mass(view, beta_at(k, G)) >= c_bg;
  };

  int k_lo = G + 1;  // smallest k with fg mass constraint satisfied
  {
    int lo = 1, hi = G;
    while (lo <= hi) {
      const int mid = (lo + hi) / 2;
      if (fg_ok(mid)) {
        k_lo = mid;
        hi = mid - 1;
      } else {
        lo = mid + 1;
      }
    }
    while (k_lo > 1 && k_lo <= G && fg_ok(k_lo - 1)) --k_lo;
    while (k_lo <= G && !fg_ok(k_lo)) ++k_lo;
  }
  int k_hi = 0;  // largest k with bg mass constraint satisfied
  {
    int lo = 1, hi = G;
    while (lo <= hi) {
      const int mid = (lo + hi) / 2;
      if (bg_ok(mid)) {
        k_hi = mid;
        lo = mid + 1;
      } else {
        hi = mid - 1;
      }
    }
    while (k_hi < G && k_hi >= 1 && bg_ok(k_hi + 1)) ++k_hi;
    while (k_hi >= 1 && !bg_ok(k_hi)) --k_hi;
  }

  if (k_lo > k_hi) {
    return solve_prior_fallback(p, labels, constraints, grid_size);
  }

  // Objective beta log beta + (1-beta) log(1-beta) is strictly convex with
  // minimum at 0.5, so the best grid point is the projection of the midpoint
  // onto [k_lo, k_hi]; scan a small window in ascending order with a strict
  // comparison, exactly like the exhaustive scan breaks ties.
  const int mid_floor = (G + 1) / 2;
  int best_k = -1;
  double best_obj = 0.0;
  for (int k = std::max(k_lo, mid_floor - 2); k <= std::min(k_hi, mid_floor + 3);
       ++k) {
    if (!fg_ok(k) || !bg_ok(k)) continue;  // fp guard; no-op under monotonicity
    const double obj = two_class_objective(beta_at(k, G));
    if (best_k < 0 || obj < best_obj) {
      best_k = k;
      best_obj = obj;
    }
  }
  if (best_k < 0) best_k = (mid_floor < k_lo) ? k_lo : k_hi;

  return make_two_class_solution(view, labels, beta_at(best_k, G),
                                 /*feasible=*/true, /*hinge=*/0.0);
}

PriorSolution solve_prior_fallback(const DistributionGrid& p,
                                   const LabelSet& labels,
                                   const PriorConstraints& constraints,
                                   int grid_size) {
  check_grid_size(grid_size);
  constraints.validate(labels);
  if (labels.foreground_count() != 1) {
    throw std::invalid_argument(
        "solve_prior_fallback: exactly one foreground label required");
  }
  const TwoClassView view = two_class_view(p, labels);
  const double c_fg = constraints.c(view.fg_label);
  const double c_bg = constraints.c(0);

  int best_k = -1;
  double best_hinge = 0.0;
  for (int k = 1; k <= grid_size; ++k) {
    const double mass = mean_fg_mass(view, beta_at(k, grid_size));
    const double hinge =
        std::max(0.0, c_fg - mass) + std::max(0.0, c_bg - (1.0 - mass));
    if (best_k < 0 || hinge < best_hinge) {
      best_k = k;
      best_hinge = hinge;
    }
  }
  return make_two_class_solution(view, labels, beta_at(best_k, grid_size),
                                 /*feasible=*/false, best_hinge);
}

namespace {

// Mean mass per present label for an arbitrary beta (multi-label case).
std::vector<double> mean_mass_multi(const DistributionGrid& pf,
                                    const LabelSet& labels,
                                    const std::vector<double>& beta) {
  std::vector<double> mass(labels.num_classes(), 0.0);
  for (int i = 0; i < pf.pixels(); ++i) {
    const double* src = pf.pixel(i);
    double denom = 0.0;
    for (int l : labels.present()) denom += src[l] * beta[l];
    for (int l : labels.present()) mass[l] += src[l] * beta[l] / denom;
  }
  for (int l : labels.present()) mass[l] /= pf.pixels();
  return mass;
}

double multi_objective(const std::vector<double>& beta, const LabelSet& labels) {
  double obj = 0.0;
  for (int l : labels.present()) {
    if (beta[l] > 0.0) obj += beta[l] * std::log(beta[l]);
  }
  return obj;
}

double multi_hinge(const std::vector<double>& mass, const LabelSet& labels,
                   const PriorConstraints& constraints) {
  double hinge = 0.0;
  for (int l : labels.present()) {
    hinge += std::max(0.0, constraints.c(l) - mass[l]);
  }
  return hinge;
}

}  // namespace

PriorSolution solve_prior_multi(const DistributionGrid& p,
                                const LabelSet& labels,
                                const PriorConstraints& constraints,
                                int grid_size) {
  check_grid_size(grid_size);
  constraints.validate(labels);
  if (labels.foreground_count() < 1) {
    throw std::invalid_argument("solve_prior_multi: no foreground label");
  }

  const DistributionGrid pf = floored(p);
  const int G = grid_size;

  std::vector<double> beta(labels.num_classes(), 0.0);
  for (int l : labels.present()) {
    beta[l] = 1.0 / labels.present_count();
  }

  std::vector<double> best_feasible_beta;
  double best_feasible_obj = 0.0;
  std::vector<double> best_hinge_beta = beta;
  double best_hinge_val = multi_hinge(mean_mass_multi(pf, labels, beta), labels,
                                      constraints);

  double prev_score = 0.0;
  bool have_prev = false;
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int l : labels.present()) {
      if (l == 0) continue;
      const double s = beta[l] + beta[0];
      if (s <= 0.0) continue;

      // Re-solve the (beta_l, beta_0) pair on the shared grid; everything
      // else stays fixed, so the candidate still sums to 1.
      std::vector<double> cand = beta;
      std::vector<double> best_cand = beta;
      bool best_cand_feasible = false;
      double best_cand_obj = 0.0;
      double best_cand_hinge = 0.0;
      bool have_cand = false;
      for (int k = 1; k <= G; ++k) {
        const double t = beta_at(k, G);
        cand[l] = t * s;
        cand[0] = (1.0 - t) * s;
        const std::vector<double> mass = mean_mass_multi(pf, labels, cand);
        bool feasible = true;
        for (int m : labels.present()) {
          if (mass[m] < constraints.c(m)) {
            feasible = false;
            break;
          }
        }
        const double obj = multi_objective(cand, labels);
        const double hinge = multi_hinge(mass, labels, constraints);

        // Track the best point seen anywhere, not just accepted moves.
        if (feasible) {
          if (best_feasible_beta.empty() || obj < best_feasible_obj) {
            best_feasible_beta = cand;
            best_feasible_obj = obj;
          }
        } else if (hinge < best_hinge_val) {
          best_hinge_val = hinge;
          best_hinge_beta = cand;
        }

        const bool better =
            !have_cand ||
            (feasible && (!best_cand_feasible || obj < best_cand_obj)) ||
            (!feasible && !best_cand_feasible && hinge < best_cand_hinge);
        if (better) {
          have_cand = true;
          best_cand = cand;
          best_cand_feasible = feasible;
          best_cand_obj = obj;
          best_cand_hinge = hinge;
        }
      }
      beta = best_cand;
    }

    const std::vector<double> mass = mean_mass_multi(pf, labels, beta);
    const bool feasible_now = multi_hinge(mass, labels, constraints) == 0.0;
    const double score = feasible_now ? multi_objective(beta, labels)
                                      : multi_hinge(mass, labels, constraints);
    if (have_prev && std::abs(score - prev_score) < 1e-8) break;
    prev_score = score;
    have_prev = true;
  }

  PriorSolution sol;
  sol.beta.assign(labels.num_classes(), 0.0);
  if (!best_feasible_beta.empty()) {
    sol.beta = best_feasible_beta;
    sol.feasible = true;
    sol.objective = best_feasible_obj;
    sol.hinge = 0.0;
  } else {
    sol.beta = best_hinge_beta;
    sol.feasible = false;
    sol.objective = multi_objective(best_hinge_beta, labels);
    sol.hinge = best_hinge_val;
  }
  sol.mean_mass = mean_mass_multi(pf, labels, sol.beta);
  for (int l = 0; l < labels.num_classes(); ++l) {
    if (!labels.is_present(l)) sol.mean_mass[l] = 0.0;
  }
  return sol;
}

PriorSolution solve_prior(const DistributionGrid& p, const LabelSet& labels,
                          const PriorConstraints& constraints, int grid_size) {
  if (labels.foreground_count() == 0) {
    // Only background present: q_aux is a point mass on label 0.
    PriorSolution sol;
    sol.beta.assign(labels.num_classes(), 0.0);
    sol.beta[0] = 1.0;
    sol.feasible = constraints.c(0) <= 1.0;
    sol.objective = 0.0;
    sol.mean_mass.assign(labels.num_classes(), 0.0);
    sol.mean_mass[0] = 1.0;
    return sol;
  }
  if (labels.foreground_count() == 1) {
    return solve_prior_two_class(p, labels, constraints, grid_size);
  }
  return solve_prior_multi(p, labels, constraints, grid_size);
}

}  // namespace weakseg
