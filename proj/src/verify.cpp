#include "weakseg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "weakseg/losses.hpp"
#include "weakseg/meanfield.hpp"
#include "weakseg/model.hpp"
#include "weakseg/rng.hpp"
#include "weakseg/synth.hpp"

namespace weakseg {

bool VerifyReport::all_pass() const {
  for (const VerifyCase& c : cases) {
    if (!c.pass) return false;
  }
  return true;
}

void VerifyReport::add(const std::string& name, double value,
                       const std::string& op, double threshold) {
  VerifyCase c;
  c.name = name;
  c.value = value;
  c.op = op;
  c.threshold = threshold;
  c.pass = op == "<" ? value < threshold : value > threshold;
  cases.push_back(c);
}

void write_verify_csv(const VerifyReport& report, std::ostream& out) {
  out << "name,value,op,threshold,pass\n";
  for (const VerifyCase& c : report.cases) {
    out.precision(17);
    out << c.name << "," << c.value << "," << c.op << "," << c.threshold << ","
        << (c.pass ? "true" : "false") << "\n";
  }
}

namespace {

FeatureImage random_features(Rng& rng, int height, int width) {
  std::vector<double> rgb(static_cast<size_t>(height) * width * 3);
  for (double& v : rgb) v = rng.uniform(0.0, 255.0);
  return FeatureImage(height, width, std::move(rgb));
}

DistributionGrid random_simplex(Rng& rng, int height, int width, int channels) {
  DistributionGrid q(height, width, channels);
  for (int p = 0; p < q.pixels(); ++p) {
    double* row = q.pixel(p);
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      row[c] = -std::log(u);
      sum += row[c];
    }
    for (int c = 0; c < channels; ++c) row[c] /= sum;
  }
  return q;
}

LogitGrid random_logits(Rng& rng, int height, int width, int channels,
                        double scale = 2.0) {
  LogitGrid f(height, width, channels);
  for (double& v : f.raw()) v = scale * rng.normal();
  return f;
}

KernelParams random_kernel(Rng& rng) {
  KernelParams k;
  k.w1 = rng.uniform(0.3, 1.5);
  k.w2 = rng.uniform(0.2, 1.0);
  k.theta_alpha = rng.uniform(20.0, 90.0);
  k.theta_beta = rng.uniform(2.0, 5.0);
  k.theta_gamma = rng.uniform(1.5, 4.0);
  return k;
}

}  // namespace

VerifyReport verify_prop31(uint64_t seed) {
  VerifyReport report;
  report.suite = "prop31";

  // Fixed-point residuals on >= 20 random zero-unary CRFs.
  const int kCrfs = 20;
  for (int t = 0; t < kCrfs; ++t) {
    Rng rng(split_seed(seed, t));
    const int height = 3 + rng.uniform_int(6);  // 3..8
    const int width = 3 + rng.uniform_int(6);
    const int labels = 2 + rng.uniform_int(3);  // 2..4

    PairwiseCrf crf;
    crf.feat = random_features(rng, height, width);
    crf.kernel = random_kernel(rng);
    crf.unary = LogitGrid(height, width, labels, 0.0);
    crf.form = PotentialForm::AgreeReward;

    MeanFieldEngine engine(crf, DenseKernelFilter::Backend::Exact);
    const DistributionGrid init = random_simplex(rng, height, width, labels);
    const auto fp = engine.fixed_point(init, 5000, 1e-10, 0.5);
    report.add("crf" + std::to_string(t) + "_residual", fp.residual, "<", 1e-8);
  }

  // On enumerable grids the fixed point should be KL-closer to the exact
  // joint than any of 1000 random factorized distributions.
  struct TinyCase {
    int height, width, labels;
  };
  const TinyCase tiny[] = {{2, 2, 3}, {1, 3, 2}, {1, 3, 3}};
  int idx = 0;
  for (const TinyCase& tc : tiny) {
    Rng rng(split_seed(seed, 1000 + idx));
    PairwiseCrf crf;
    crf.feat = random_features(rng, tc.height, tc.width);
    KernelParams k = random_kernel(rng);
    k.w1 = rng.uniform(0.3, 0.8);
    k.w2 = rng.uniform(0.2, 0.6);
    crf.kernel = k;
    crf.unary = LogitGrid(tc.height, tc.width, tc.labels, 0.0);
    crf.form = PotentialForm::AgreeReward;

    MeanFieldEngine engine(crf, DenseKernelFilter::Backend::Exact);
    const DistributionGrid init =
        random_simplex(rng, tc.height, tc.width, tc.labels);
    const auto fp = engine.fixed_point(init, 5000, 1e-12, 0.5);
    ExactCrfDistribution exact(crf);
    const double kl_mf = exact.kl_from_factorized(fp.q);

    double best_random = 1e300;
    for (int r = 0; r < 1000; ++r) {
      const DistributionGrid q =
          random_simplex(rng, tc.height, tc.width, tc.labels);
      best_random = std::min(best_random, exact.kl_from_factorized(q));
    }
    report.add("tiny" + std::to_string(idx) + "_kl_gap_vs_1000_random",
               kl_mf - best_random, "<", 1e-12);
    ++idx;
  }
  return report;
}

namespace {

// Max abs difference between analytic d loss / d logits and central finite
// differences of `loss_at` over every logit.
double fd_check_logits(const LogitGrid& logits, const LogitGrid& analytic,
                       const std::function<double(const LogitGrid&)>& loss_at,
                       double h = 1e-5) {
  double worst = 0.0;
  LogitGrid probe = logits;
  for (int p = 0; p < logits.pixels(); ++p) {
    for (int c = 0; c < logits.channels(); ++c) {
      const double saved = probe(p, c);
      probe(p, c) = saved + h;
      const double up = loss_at(probe);
      probe(p, c) = saved - h;
      const double down = loss_at(probe);
      probe(p, c) = saved;
      const double fd = (up - down) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - analytic(p, c)));
    }
  }
  return worst;
}

}  // namespace

VerifyReport verify_gradients(uint64_t seed) {
  VerifyReport report;
  report.suite = "gradients";

  const int kInstances = 50;
  double worst_class = 0.0;
  double worst_stop[2] = {0.0, 0.0};  // weighted, exponentiated
  double worst_full[2] = {0.0, 0.0};

  for (int t = 0; t < kInstances; ++t) {
    Rng rng(split_seed(seed, t));
    const int height = 2 + rng.uniform_int(4);  // 2..5
    const int width = 2 + rng.uniform_int(4);
    const int channels = 2 + rng.uniform_int(2);  // 2..3

    const FeatureImage feat = random_features(rng, height, width);
    const KernelParams kernel = random_kernel(rng);
    const DenseKernelFilter filter(kernel, feat,
                                   DenseKernelFilter::Backend::Exact);
    const LogitGrid logits = random_logits(rng, height, width, channels);

    // Classification loss against a random constant target.
    const DistributionGrid q_aux = random_simplex(rng, height, width, channels);
    const ClassificationLoss cls = classification_loss_and_grad(logits, q_aux);
    worst_class = std::max(
        worst_class,
        fd_check_logits(logits, cls.grad, [&](const LogitGrid& f) {
          return classification_loss_and_grad(f, q_aux).loss;
        }));

    for (int m = 0; m < 2; ++m) {
      const NeighborhoodMode mode =
          m == 0 ? NeighborhoodMode::WeightedMean
                 : NeighborhoodMode::ExponentiatedWeightedMean;

      // Stop-gradient: the finite-difference objective freezes the target
      // at its value for the unperturbed logits.
      const NeighborhoodLoss stop =
          neighborhood_loss_and_grad(mode, filter, logits, true);
      const DistributionGrid frozen_target = stop.target;
      worst_stop[m] = std::max(
          worst_stop[m],
          fd_check_logits(logits, stop.grad, [&](const LogitGrid& f) {
            return kl_divergence(softmax_grid(f), frozen_target);
          }));

      // Full backprop: the objective recomputes the target every time.
      const NeighborhoodLoss full =
          neighborhood_loss_and_grad(mode, filter, logits, false);
      worst_full[m] = std::max(
          worst_full[m],
          fd_check_logits(logits, full.grad, [&](const LogitGrid& f) {
            return neighborhood_loss_and_grad(mode, filter, f, false).loss;
          }));
    }
  }

  report.add("instances", kInstances, ">", 49.5);
  report.add("classification_fd_max_abs", worst_class, "<", 1e-6);
  report.add("neighborhood_weighted_stopgrad_fd_max_abs", worst_stop[0], "<", 1e-6);
  report.add("neighborhood_exponentiated_stopgrad_fd_max_abs", worst_stop[1], "<",
             1e-6);
  report.add("neighborhood_weighted_full_fd_max_abs", worst_full[0], "<", 1e-6);
  report.add("neighborhood_exponentiated_full_fd_max_abs", worst_full[1], "<",
             1e-6);

  // End-to-end network chain at 1e-5 relative tolerance, <= 500 parameters.
  double worst_rel = 0.0;
  int max_params = 0;
  for (int t = 0; t < 10; ++t) {
    Rng rng(split_seed(seed, 5000 + t));
    const int channels = 2 + rng.uniform_int(2);
    const int size = 6;
    TinyFcn model({3, 4, channels}, rng.next_u64());
    max_params = std::max(max_params, model.parameter_count());

    ImageU8 image(size, size);
    for (uint8_t& v : image.rgb) v = static_cast<uint8_t>(rng.uniform_int(256));
    const FeatureImage feat = FeatureImage::from_image(image);
    const KernelParams kernel = random_kernel(rng);
    const DenseKernelFilter filter(kernel, feat,
                                   DenseKernelFilter::Backend::Exact);
    const LabelSet labels(channels, channels == 2 ? std::vector<int>{0, 1}
                                                  : std::vector<int>{0, 1, 2});
    const PriorConstraints constraints(0.3, 0.15);
    const double lambda = 0.3;
    const NeighborhoodMode mode = NeighborhoodMode::ExponentiatedWeightedMean;

    // Freeze the auxiliary target and the neighborhood target at the
    // unperturbed parameters; both are treated as constants by the training
    // gradient.
    TinyFcn::ForwardCache cache;
    const LogitGrid logits = model.forward_cached(image, cache);
    const DistributionGrid p0 = softmax_grid(logits);
    const PriorSolution prior = solve_prior(p0, labels, constraints, 101);
    const DistributionGrid q_aux = apply_prior(p0, prior.beta, labels);
    const NeighborhoodLoss neighb =
        neighborhood_loss_and_grad(mode, filter, logits, true);
    const DistributionGrid target = neighb.target;

    auto loss_at_logits = [&](const LogitGrid& f) {
      return classification_loss_and_grad(f, q_aux).loss +
             lambda * kl_divergence(softmax_grid(f), target);
    };

    // Analytic gradient through the network.
    const ClassificationLoss cls = classification_loss_and_grad(logits, q_aux);
    LogitGrid grad_logits = cls.grad;
    for (size_t i = 0; i < grad_logits.raw().size(); ++i) {
      grad_logits.raw()[i] += lambda * neighb.grad.raw()[i];
    }
    const TinyFcn::Gradients grads = model.backward(cache, grad_logits);

    std::vector<double> analytic;
    for (size_t k = 0; k < grads.w.size(); ++k) {
      analytic.insert(analytic.end(), grads.w[k].begin(), grads.w[k].end());
      analytic.insert(analytic.end(), grads.b[k].begin(), grads.b[k].end());
    }

    std::vector<double> params = model.parameters();
    TinyFcn probe = model;
    const double h = 1e-5;
    for (size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + h;
      probe.set_parameters(params);
      const double up = loss_at_logits(probe.forward(image));
      params[i] = saved - h;
      probe.set_parameters(params);
      const double down = loss_at_logits(probe.forward(image));
      params[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel = std::abs(fd - analytic[i]) /
                         std::max({1.0, std::abs(fd), std::abs(analytic[i])});
      worst_rel = std::max(worst_rel, rel);
    }
    probe.set_parameters(params);
  }
  report.add("tinyfcn_parameter_budget", max_params, "<", 500.5);
  report.add("tinyfcn_fd_max_rel", worst_rel, "<", 1e-5);
  return report;
}

namespace {

// Exhaustive two-class oracle built on the public apply_prior operation;
// deliberately independent of the solver internals.
struct PriorOracle {
  double beta_fg = 0.0;
  bool feasible = false;
  double hinge = 0.0;
};

PriorOracle prior_oracle_scan(const DistributionGrid& p, const LabelSet& labels,
                              const PriorConstraints& constraints,
                              int grid_size) {
  const int fg = labels.present()[1];
  const double c_fg = constraints.c(fg);
  const double c_bg = constraints.c(0);

  PriorOracle best_feasible;
  bool have_feasible = false;
  double best_obj = 0.0;
  PriorOracle best_hinge;
  bool have_hinge = false;

  std::vector<double> beta(labels.num_classes(), 0.0);
  for (int k = 1; k <= grid_size; ++k) {
    const double b = static_cast<double>(k) / (grid_size + 1.0);
    beta[fg] = b;
    beta[0] = 1.0 - b;
    const DistributionGrid q = apply_prior(p, beta, labels);
    double mass_fg = 0.0, mass_bg = 0.0;
    for (int i = 0; i < q.pixels(); ++i) {
      mass_fg += q(i, fg);
      mass_bg += q(i, 0);
    }
    mass_fg /= q.pixels();
    mass_bg /= q.pixels();

    if (mass_fg >= c_fg && mass_bg >= c_bg) {
      const double obj = b * std::log(b) + (1.0 - b) * std::log(1.0 - b);
      if (!have_feasible || obj < best_obj) {
        have_feasible = true;
        best_obj = obj;
        best_feasible.beta_fg = b;
        best_feasible.feasible = true;
      }
    }
    const double hinge =
        std::max(0.0, c_fg - mass_fg) + std::max(0.0, c_bg - mass_bg);
    if (!have_hinge || hinge < best_hinge.hinge) {
      have_hinge = true;
      best_hinge.hinge = hinge;
      best_hinge.beta_fg = b;
    }
  }
  return have_feasible ? best_feasible : best_hinge;
}

}  // namespace

VerifyReport verify_prior(uint64_t seed) {
  VerifyReport report;
  report.suite = "prior";
  const int kOracleGrid = 10001;

  double worst_beta_diff = 0.0;
  int flag_mismatches = 0;
  double worst_margin = 1e300;
  for (int t = 0; t < 20; ++t) {
    Rng rng(split_seed(seed, t));
    const int height = 2 + rng.uniform_int(5);
    const int width = 2 + rng.uniform_int(5);
    const int channels = 2 + rng.uniform_int(3);  // 2..4
    const int fg = 1 + rng.uniform_int(channels - 1);
    const LabelSet labels(channels, {0, fg});
    const DistributionGrid p = random_simplex(rng, height, width, channels);
    double c_bg = rng.uniform(0.1, 0.5);
    double c_fg = rng.uniform(0.05, 0.45);
    if (c_bg + c_fg > 0.95) {
      const double scale = 0.95 / (c_bg + c_fg);
      c_bg *= scale;
      c_fg *= scale;
    }
    PriorConstraints constraints(c_bg, c_fg);
    constraints.set(fg, c_fg);

    const PriorSolution sol =
        solve_prior_two_class(p, labels, constraints, kOracleGrid);
    const PriorOracle oracle =
        prior_oracle_scan(p, labels, constraints, kOracleGrid);

    worst_beta_diff =
        std::max(worst_beta_diff, std::abs(sol.beta[fg] - oracle.beta_fg));
    if (sol.feasible != oracle.feasible) ++flag_mismatches;

    if (sol.feasible) {
      // Independent re-check of both constraints at the returned point.
      const DistributionGrid q = apply_prior(p, sol.beta, labels);
      double mass_fg = 0.0, mass_bg = 0.0;
      for (int i = 0; i < q.pixels(); ++i) {
        mass_fg += q(i, fg);
        mass_bg += q(i, 0);
      }
      mass_fg /= q.pixels();
      mass_bg /= q.pixels();
      worst_margin = std::min(worst_margin, mass_fg - constraints.c(fg));
      worst_margin = std::min(worst_margin, mass_bg - constraints.c(0));
    }
  }
  report.add("two_class_beta_vs_oracle_max_abs", worst_beta_diff, "<", 1e-12);
  report.add("two_class_flag_mismatches", flag_mismatches, "<", 0.5);
  report.add("two_class_constraint_margin_min", worst_margin, ">", -1e-12);

  // Constructed infeasible instances: all probability on the background and
  // a demanding foreground constraint; no grid point can satisfy it.
  double worst_fallback_beta = 0.0;
  double worst_fallback_hinge = 0.0;
  int fallback_feasible_flags = 0;
  for (int t = 0; t < 5; ++t) {
    Rng rng(split_seed(seed, 4000 + t));
    const int height = 2 + rng.uniform_int(3);
    const int width = 2 + rng.uniform_int(3);
    const LabelSet labels(2, {0, 1});
    DistributionGrid p(height, width, 2, 0.0);
    for (int i = 0; i < p.pixels(); ++i) p(i, 0) = 1.0;
    const PriorConstraints constraints(0.5, 0.3);

    const PriorSolution sol = solve_prior(p, labels, constraints, 1001);
    const PriorOracle oracle = prior_oracle_scan(p, labels, constraints, 1001);
    if (sol.feasible) ++fallback_feasible_flags;
    worst_fallback_beta =
        std::max(worst_fallback_beta, std::abs(sol.beta[1] - oracle.beta_fg));
    worst_fallback_hinge =
        std::max(worst_fallback_hinge, std::abs(sol.hinge - oracle.hinge));
  }
  report.add("fallback_beta_vs_oracle_max_abs", worst_fallback_beta, "<", 1e-12);
  report.add("fallback_hinge_vs_oracle_max_abs", worst_fallback_hinge, "<", 1e-12);
  report.add("fallback_feasible_flags", fallback_feasible_flags, "<", 0.5);

  // The default constraint levels shipped with the tool.
  const PriorConstraints defaults;
  report.add("default_c_background_err", std::abs(defaults.c(0) - 0.4), "<", 1e-15);
  report.add("default_c_foreground_err", std::abs(defaults.c(1) - 0.2), "<", 1e-15);
  return report;
}

VerifyReport verify_filter(uint64_t seed) {
  VerifyReport report;
  report.suite = "filter";

  // Lattice vs exact on >= 20 small scenes at the default operating point.
  double worst_values = 0.0;
  double worst_normalizer = 0.0;
  const int kScenes = 20;
  for (int t = 0; t < kScenes; ++t) {
    Rng rng(split_seed(seed, t));
    SceneConfig config;
    config.size = 16 + rng.uniform_int(17);  // 16..32
    config.sigma = 10.0;
    config.num_classes = 4;
    config.palette = default_palette(3);
    config.fg_class = 1 + rng.uniform_int(3);
    config.shape = static_cast<ShapeKind>(rng.uniform_int(3));
    const SyntheticScene scene = generate_scene(config, rng.next_u64());
    const FeatureImage feat = FeatureImage::from_image(scene.image);

    KernelParams kernel;  // defaults
    if (t % 3 == 1) kernel.downscale = 2;
    if (t % 3 == 2) {
      kernel.w1 = 6.0;
      kernel.theta_alpha = 20.0;
    }

    const DistributionGrid field =
        random_simplex(rng, config.size, config.size, 3);
    const FilterResult exact = filter_exact(kernel, feat, field);
    const FilterResult fast = filter_fast(kernel, feat, field);

    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < exact.values.raw().size(); ++i) {
      num += std::abs(fast.values.raw()[i] - exact.values.raw()[i]);
      den += std::abs(exact.values.raw()[i]);
    }
    worst_values = std::max(worst_values, num / den);

    double num_n = 0.0, den_n = 0.0;
    for (size_t i = 0; i < exact.normalizer.size(); ++i) {
      num_n += std::abs(fast.normalizer[i] - exact.normalizer[i]);
      den_n += std::abs(exact.normalizer[i]);
    }
    worst_normalizer = std::max(worst_normalizer, num_n / den_n);
  }
  report.add("scenes", kScenes, ">", 19.5);
  report.add("fast_vs_exact_values_rel_l1_max", worst_values, "<", 0.05);
  report.add("fast_vs_exact_normalizer_rel_l1_max", worst_normalizer, "<", 0.05);

  // Exact backend vs an inline triple loop written from the kernel formula.
  double worst_exact = 0.0;
  for (int t = 0; t < 5; ++t) {
    Rng rng(split_seed(seed, 7000 + t));
    const int height = 4 + rng.uniform_int(9);  // 4..12
    const int width = 4 + rng.uniform_int(9);
    const FeatureImage feat = random_features(rng, height, width);
    const KernelParams kernel = random_kernel(rng);
    const DistributionGrid field = random_simplex(rng, height, width, 2);

    const FilterResult exact = filter_exact(kernel, feat, field);

    const int n = feat.pixels();
    for (int i = 0; i < n; ++i) {
      double acc[2] = {0.0, 0.0};
      double norm = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double* xi = feat.color(i);
        const double* xj = feat.color(j);
        double color2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          color2 += (xi[c] - xj[c]) * (xi[c] - xj[c]);
        }
        const double drow = feat.row(i) - feat.row(j);
        const double dcol = feat.col(i) - feat.col(j);
        const double pos2 = drow * drow + dcol * dcol;
        const double tb = kernel.theta_beta / kernel.downscale;
        const double tg = kernel.theta_gamma / kernel.downscale;
        const double k =
            kernel.w1 * std::exp(-color2 / (2 * kernel.theta_alpha *
                                            kernel.theta_alpha) -
                                 pos2 / (2 * tb * tb)) +
            kernel.w2 * std::exp(-pos2 / (2 * tg * tg));
        acc[0] += k * field(j, 0);
        acc[1] += k * field(j, 1);
        norm += k;
      }
      worst_exact = std::max(worst_exact, std::abs(acc[0] - exact.values(i, 0)));
      worst_exact = std::max(worst_exact, std::abs(acc[1] - exact.values(i, 1)));
      worst_exact = std::max(worst_exact, std::abs(norm - exact.normalizer[i]));
    }
  }
  report.add("exact_vs_triple_loop_max_abs", worst_exact, "<", 1e-10);
  return report;
}

VerifyReport verify_equivalence(uint64_t seed) {
  VerifyReport report;
  report.suite = "equivalence";

  double worst_forms_normalized = 0.0;
  double worst_forms_raw = 0.0;
  double smallest_counterexample = 1e300;
  for (int t = 0; t < 5; ++t) {
    Rng rng(split_seed(seed, t));
    SceneConfig config;
    config.size = 16;
    config.sigma = 12.0;
    config.num_classes = 4;
    config.palette = default_palette(3);
    config.fg_class = 1 + rng.uniform_int(3);
    config.shape = static_cast<ShapeKind>(rng.uniform_int(3));
    const SyntheticScene scene = generate_scene(config, rng.next_u64());
    const FeatureImage feat = FeatureImage::from_image(scene.image);

    KernelParams kernel;
    kernel.w1 = rng.uniform(0.5, 2.0);
    kernel.w2 = rng.uniform(0.3, 1.0);

    const DistributionGrid q = random_simplex(rng, 16, 16, 3);
    const EquivalenceReport eq = potential_equivalence_check(kernel, feat, q);
    worst_forms_normalized =
        std::max(worst_forms_normalized, eq.max_diff_forms_normalized);
    worst_forms_raw = std::max(worst_forms_raw, eq.max_diff_forms_raw);
    smallest_counterexample =
        std::min(smallest_counterexample, eq.max_diff_raw_vs_normalized);
  }
  report.add("forms_normalized_kernel_max_diff", worst_forms_normalized, "<",
             1e-10);
  report.add("forms_raw_kernel_max_diff", worst_forms_raw, "<", 1e-10);
  report.add("raw_vs_normalized_kernel_min_diff", smallest_counterexample, ">",
             1e-3);
  return report;
}

VerifyReport run_verify_suite(const std::string& suite, uint64_t seed) {
  if (suite == "prop31") return seed ? verify_prop31(seed) : verify_prop31();
  if (suite == "gradients") return seed ? verify_gradients(seed) : verify_gradients();
  if (suite == "prior") return seed ? verify_prior(seed) : verify_prior();
  if (suite == "filter") return seed ? verify_filter(seed) : verify_filter();
  if (suite == "equivalence") {
    return seed ? verify_equivalence(seed) : verify_equivalence();
  }
  throw std::invalid_argument(
      "unknown verify suite '" + suite +
      "' (expected gradients, prop31, prior, filter or equivalence)");
}

}  // namespace weakseg
