#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "weakseg/config.hpp"
#include "weakseg/distribution.hpp"
#include "weakseg/image.hpp"
#include "weakseg/image_io.hpp"
#include "weakseg/kernel.hpp"
#include "weakseg/losses.hpp"
#include "weakseg/meanfield.hpp"
#include "weakseg/metrics.hpp"
#include "weakseg/model.hpp"
#include "weakseg/neighborhood.hpp"
#include "weakseg/prior.hpp"
#include "weakseg/synth.hpp"
#include "weakseg/verify.hpp"

namespace py = pybind11;
using namespace weakseg;

namespace {

// ---- numpy <-> core type conversions -------------------------------------
//
// Arrays are copied at the boundary in both directions: the core types own
// their storage and none of the wrapped calls are hot enough for zero-copy
// views to be worth the aliasing hazards.

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<uint8_t, py::array::c_style | py::array::forcecast>;

Grid grid_from_array(const DoubleArray& arr, const char* what) {
  if (arr.ndim() != 3) {
    throw std::invalid_argument(std::string(what) +
                                ": expected a (height, width, channels) array");
  }
  const int h = static_cast<int>(arr.shape(0));
  const int w = static_cast<int>(arr.shape(1));
  const int c = static_cast<int>(arr.shape(2));
  if (h <= 0 || w <= 0 || c <= 0) {
    throw std::invalid_argument(std::string(what) + ": empty array");
  }
  Grid g(h, w, c);
  std::copy_n(arr.data(), g.raw().size(), g.raw().data());
  return g;
}

LogitGrid logits_from_array(const DoubleArray& arr, const char* what) {
  Grid g = grid_from_array(arr, what);
  LogitGrid out(g.height(), g.width(), g.channels());
  out.raw() = g.raw();
  return out;
}

DistributionGrid distribution_from_array(const DoubleArray& arr,
                                         const char* what) {
  Grid g = grid_from_array(arr, what);
  DistributionGrid out(g.height(), g.width(), g.channels());
  out.raw() = g.raw();
  out.validate();
  return out;
}

py::array_t<double> array_from_grid(const Grid& g) {
  py::array_t<double> arr({g.height(), g.width(), g.channels()});
  std::copy_n(g.raw().data(), g.raw().size(), arr.mutable_data());
  return arr;
}

ImageU8 image_from_array(const ByteArray& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3) {
    throw std::invalid_argument("image: expected a (height, width, 3) uint8 array");
  }
  ImageU8 image(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy_n(arr.data(), image.rgb.size(), image.rgb.data());
  return image;
}

py::array_t<uint8_t> array_from_image(const ImageU8& image) {
  py::array_t<uint8_t> arr({image.height, image.width, 3});
  std::copy_n(image.rgb.data(), image.rgb.size(), arr.mutable_data());
  return arr;
}

MaskU8 mask_from_array(const ByteArray& arr) {
  if (arr.ndim() != 2) {
    throw std::invalid_argument("mask: expected a (height, width) uint8 array");
  }
  MaskU8 mask(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy_n(arr.data(), mask.labels.size(), mask.labels.data());
  return mask;
}

py::array_t<uint8_t> array_from_mask(const MaskU8& mask) {
  py::array_t<uint8_t> arr({mask.height, mask.width});
  std::copy_n(mask.labels.data(), mask.labels.size(), arr.mutable_data());
  return arr;
}

LabelSet label_set(int num_classes, const std::vector<int>& present) {
  return LabelSet(num_classes, present);
}

PotentialForm parse_form(const std::string& name) {
  if (name == "agree") return PotentialForm::AgreeReward;
  if (name == "potts") return PotentialForm::PottsDisagree;
  throw std::invalid_argument("unknown potential form '" + name +
                              "' (expected 'agree' or 'potts')");
}

ShapeKind parse_shape(const std::string& name) {
  if (name == "disk") return ShapeKind::Disk;
  if (name == "rectangle") return ShapeKind::Rectangle;
  if (name == "triangle") return ShapeKind::Triangle;
  throw std::invalid_argument(
      "unknown shape '" + name +
      "' (expected 'disk', 'rectangle' or 'triangle')");
}

py::dict scene_to_dict(const SyntheticScene& scene) {
  py::dict d;
  d["image"] = array_from_image(scene.image);
  d["mask"] = array_from_mask(scene.gt_mask);
  d["labels"] = scene.labels.present();
  d["num_classes"] = scene.labels.num_classes();
  d["seed"] = scene.seed;
  return d;
}

py::dict prior_to_dict(const PriorSolution& sol) {
  py::dict d;
  d["beta"] = sol.beta;
  d["feasible"] = sol.feasible;
  d["objective"] = sol.objective;
  d["hinge"] = sol.hinge;
  d["mean_mass"] = sol.mean_mass;
  return d;
}

PriorConstraints make_constraints(double c_background, double c_foreground) {
  return PriorConstraints(c_background, c_foreground);
}

}  // namespace

PYBIND11_MODULE(_weakseg, m) {
  m.doc() =
      "Numerical core for weakly supervised segmentation experiments: "
      "bilateral kernel filtering, neighborhood-consensus losses, the "
      "entropy-maximizing label prior, mean-field inference and a small "
      "hand-backpropagated FCN. Arrays are numpy (height, width, channels) "
      "float64 for fields/logits and uint8 for images/masks.";

  // ---- kernel -------------------------------------------------------------

  py::class_<KernelParams>(m, "KernelParams",
                           "Two-kernel pairwise weights: a bilateral "
                           "(color+position) term plus a pure spatial term.")
      .def(py::init([](double w1, double w2, double theta_alpha,
                       double theta_beta, double theta_gamma, int downscale) {
             KernelParams p;
             p.w1 = w1;
             p.w2 = w2;
             p.theta_alpha = theta_alpha;
             p.theta_beta = theta_beta;
             p.theta_gamma = theta_gamma;
             p.downscale = downscale;
             p.validate();
             return p;
           }),
           py::kw_only(), py::arg("w1") = 10.0, py::arg("w2") = 3.0,
           py::arg("theta_alpha") = 13.0, py::arg("theta_beta") = 13.0,
           py::arg("theta_gamma") = 3.0, py::arg("downscale") = 1)
      .def_readwrite("w1", &KernelParams::w1)
      .def_readwrite("w2", &KernelParams::w2)
      .def_readwrite("theta_alpha", &KernelParams::theta_alpha)
      .def_readwrite("theta_beta", &KernelParams::theta_beta)
      .def_readwrite("theta_gamma", &KernelParams::theta_gamma)
      .def_readwrite("downscale", &KernelParams::downscale)
      .def("__repr__", [](const KernelParams& p) {
        return "KernelParams(w1=" + std::to_string(p.w1) +
               ", w2=" + std::to_string(p.w2) +
               ", theta_alpha=" + std::to_string(p.theta_alpha) +
               ", theta_beta=" + std::to_string(p.theta_beta) +
               ", theta_gamma=" + std::to_string(p.theta_gamma) +
               ", downscale=" + std::to_string(p.downscale) + ")";
      });

  m.def(
      "kernel_value",
      [](const ByteArray& image, int i, int j, const KernelParams& kernel) {
        const ImageU8 img = image_from_array(image);
        return kernel_value(kernel, FeatureImage::from_image(img), i, j);
      },
      py::arg("image"), py::arg("i"), py::arg("j"), py::kw_only(),
      py::arg("kernel") = KernelParams{},
      "Pair weight k(i, j) between two flat pixel indices (i == j errors).");

  const auto bind_filter = [&m](const char* name, auto fn, const char* doc) {
    m.def(
        name,
        [fn](const ByteArray& image, const DoubleArray& field,
             const KernelParams& kernel) {
          const ImageU8 img = image_from_array(image);
          const Grid v = grid_from_array(field, "field");
          FilterResult res = fn(kernel, FeatureImage::from_image(img), v);
          py::array_t<double> norm({img.height, img.width});
          std::copy_n(res.normalizer.data(), res.normalizer.size(),
                      norm.mutable_data());
          return py::make_tuple(array_from_grid(res.values), norm);
        },
        py::arg("image"), py::arg("field"), py::kw_only(),
        py::arg("kernel") = KernelParams{}, doc);
  };
  bind_filter("filter_exact", filter_exact,
              "O(n^2) reference filter. Returns (values, normalizer): "
              "values[i, c] = sum_{j != i} k(i,j) field[j, c] and "
              "normalizer[i] = sum_{j != i} k(i,j).");
  bind_filter("filter_fast", filter_fast,
              "Permutohedral-lattice approximation of filter_exact; same "
              "return convention.");

  // ---- distributions --------------------------------------------------------

  m.def(
      "softmax",
      [](const DoubleArray& logits) {
        return array_from_grid(softmax_grid(logits_from_array(logits, "logits")));
      },
      py::arg("logits"), "Per-pixel softmax over the channel axis.");

  m.def(
      "kl_divergence",
      [](const DoubleArray& p, const DoubleArray& q) {
        return kl_divergence(distribution_from_array(p, "p"),
                             distribution_from_array(q, "q"));
      },
      py::arg("p"), py::arg("q"),
      "Sum over pixels of KL(p_i || q_i), both sides floored at 1e-12.");

  m.def(
      "entropy",
      [](const std::vector<double>& weights) {
        return entropy(std::span<const double>(weights));
      },
      py::arg("weights"),
      "Shannon entropy in nats, with the 0 log 0 = 0 convention.");

  // ---- neighborhood operators and losses -----------------------------------

  const auto bind_neigh = [&m](const char* name, auto fn, const char* doc) {
    m.def(
        name,
        [fn](const ByteArray& image, const DoubleArray& p,
             const KernelParams& kernel) {
          const ImageU8 img = image_from_array(image);
          return array_from_grid(fn(kernel, FeatureImage::from_image(img),
                                    distribution_from_array(p, "p")));
        },
        py::arg("image"), py::arg("p"), py::kw_only(),
        py::arg("kernel") = KernelParams{}, doc);
  };
  bind_neigh(
      "weighted_mean",
      static_cast<DistributionGrid (*)(const KernelParams&, const FeatureImage&,
                                       const DistributionGrid&)>(weighted_mean),
      "Kernel-weighted average of the label field around each pixel "
      "(diagonal excluded, weights normalized per pixel).");
  bind_neigh("exponentiated_weighted_mean",
             static_cast<DistributionGrid (*)(const KernelParams&,
                                              const FeatureImage&,
                                              const DistributionGrid&)>(
                 exponentiated_weighted_mean),
             "Per-pixel softmax of the weighted mean.");

  m.def(
      "neighborhood_loss",
      [](const ByteArray& image, const DoubleArray& logits,
         const std::string& mode, bool stop_gradient,
         const KernelParams& kernel) {
        const ImageU8 img = image_from_array(image);
        NeighborhoodLoss res = neighborhood_loss_and_grad(
            parse_neighborhood_mode(mode), kernel,
            FeatureImage::from_image(img), logits_from_array(logits, "logits"),
            stop_gradient);
        py::dict d;
        d["loss"] = res.loss;
        d["grad"] = array_from_grid(res.grad);
        d["target"] = array_from_grid(res.target);
        return d;
      },
      py::arg("image"), py::arg("logits"), py::kw_only(),
      py::arg("mode") = "exponentiated", py::arg("stop_gradient") = true,
      py::arg("kernel") = KernelParams{},
      "KL between softmax(logits) and its neighborhood distribution. "
      "Returns {'loss', 'grad', 'target'}; grad is d loss / d logits.");

  // ---- entropy prior --------------------------------------------------------

  m.def(
      "solve_prior",
      [](const DoubleArray& p, const std::vector<int>& present,
         double c_background, double c_foreground, int grid_size) {
        const DistributionGrid dist = distribution_from_array(p, "p");
        const LabelSet labels = label_set(dist.channels(), present);
        return prior_to_dict(solve_prior(
            dist, labels, make_constraints(c_background, c_foreground),
            grid_size));
      },
      py::arg("p"), py::arg("present"), py::kw_only(),
      py::arg("c_background") = 0.4, py::arg("c_foreground") = 0.2,
      py::arg("grid_size") = 1001,
      "Entropy-maximizing mixture weights for the present labels. Returns "
      "{'beta', 'feasible', 'objective', 'hinge', 'mean_mass'}.");

  m.def(
      "apply_prior",
      [](const DoubleArray& p, const std::vector<double>& beta,
         const std::vector<int>& present) {
        const DistributionGrid dist = distribution_from_array(p, "p");
        return array_from_grid(
            apply_prior(dist, beta, label_set(dist.channels(), present)));
      },
      py::arg("p"), py::arg("beta"), py::arg("present"),
      "Reweight p by beta over the present labels and renormalize per pixel; "
      "absent labels get exactly zero mass.");

  m.def(
      "total_loss",
      [](const ByteArray& image, const DoubleArray& logits,
         const std::vector<int>& present, double lam, const std::string& mode,
         bool use_prior, bool stop_gradient, bool normalize_per_pixel,
         double c_background, double c_foreground, int grid_size,
         const KernelParams& kernel) {
        const ImageU8 img = image_from_array(image);
        const LogitGrid lg = logits_from_array(logits, "logits");
        LossConfig config;
        config.lambda = lam;
        config.mode = parse_neighborhood_mode(mode);
        config.use_prior = use_prior;
        config.stop_gradient = stop_gradient;
        config.normalize_per_pixel = normalize_per_pixel;
        LossReport report = total_loss_and_grad(
            config, kernel, FeatureImage::from_image(img), lg,
            label_set(lg.channels(), present),
            make_constraints(c_background, c_foreground), grid_size);
        py::dict d;
        d["class_loss"] = report.class_loss;
        d["neighb_loss"] = report.neighb_loss;
        d["total"] = report.total;
        d["grad"] = array_from_grid(report.grad);
        d["aux"] = array_from_grid(report.aux);
        d["prior"] = prior_to_dict(report.prior);
        d["pixel_count"] = report.pixel_count;
        return d;
      },
      py::arg("image"), py::arg("logits"), py::arg("present"), py::kw_only(),
      py::arg("lam") = 0.3, py::arg("mode") = "exponentiated",
      py::arg("use_prior") = true, py::arg("stop_gradient") = true,
      py::arg("normalize_per_pixel") = false, py::arg("c_background") = 0.4,
      py::arg("c_foreground") = 0.2, py::arg("grid_size") = 1001,
      py::arg("kernel") = KernelParams{},
      "Full per-image training signal: cross-entropy against the "
      "prior-reweighted auxiliary target plus lam * neighborhood KL. "
      "Returns a dict with losses, d total / d logits, the auxiliary "
      "target and the prior solution.");

  // ---- mean field -----------------------------------------------------------

  m.def(
      "meanfield_step",
      [](const ByteArray& image, const DoubleArray& unary,
         const DoubleArray& q, const std::string& form, bool normalize_kernel,
         const KernelParams& kernel) {
        const ImageU8 img = image_from_array(image);
        PairwiseCrf crf{logits_from_array(unary, "unary"), kernel,
                        FeatureImage::from_image(img), parse_form(form),
                        normalize_kernel};
        return array_from_grid(meanfield_step(crf, distribution_from_array(q, "q")));
      },
      py::arg("image"), py::arg("unary"), py::arg("q"), py::kw_only(),
      py::arg("form") = "agree", py::arg("normalize_kernel") = false,
      py::arg("kernel") = KernelParams{},
      "One parallel mean-field update of all pixels. unary holds costs in "
      "nats; form is 'agree' or 'potts'.");

  m.def(
      "meanfield_fixed_point",
      [](const ByteArray& image, const DoubleArray& unary,
         std::optional<DoubleArray> init, int max_iters, double tol,
         double damping, const std::string& form, bool normalize_kernel,
         const KernelParams& kernel) {
        const ImageU8 img = image_from_array(image);
        PairwiseCrf crf{logits_from_array(unary, "unary"), kernel,
                        FeatureImage::from_image(img), parse_form(form),
                        normalize_kernel};
        DistributionGrid start =
            init ? distribution_from_array(*init, "init")
                 : DistributionGrid::uniform(img.height, img.width,
                                             crf.unary.channels());
        auto fp = meanfield_fixed_point(crf, start, max_iters, tol, damping);
        py::dict d;
        d["q"] = array_from_grid(fp.q);
        d["iterations"] = fp.iterations;
        d["residual"] = fp.residual;
        return d;
      },
      py::arg("image"), py::arg("unary"), py::kw_only(),
      py::arg("init") = py::none(), py::arg("max_iters") = 200,
      py::arg("tol") = 1e-9, py::arg("damping") = 0.5,
      py::arg("form") = "agree", py::arg("normalize_kernel") = false,
      py::arg("kernel") = KernelParams{},
      "Damped mean-field iteration from init (uniform when omitted). "
      "Returns {'q', 'iterations', 'residual'}.");

  m.def(
      "potential_equivalence_check",
      [](const ByteArray& image, const DoubleArray& q,
         const KernelParams& kernel) {
        const ImageU8 img = image_from_array(image);
        EquivalenceReport rep = potential_equivalence_check(
            kernel, FeatureImage::from_image(img),
            distribution_from_array(q, "q"));
        py::dict d;
        d["max_diff_forms_normalized"] = rep.max_diff_forms_normalized;
        d["max_diff_forms_raw"] = rep.max_diff_forms_raw;
        d["max_diff_raw_vs_normalized"] = rep.max_diff_raw_vs_normalized;
        return d;
      },
      py::arg("image"), py::arg("q"), py::kw_only(),
      py::arg("kernel") = KernelParams{},
      "Compare one zero-unary mean-field update across potential forms and "
      "kernel normalizations.");

  // ---- model ----------------------------------------------------------------

  py::class_<TinyFcn>(m, "TinyFcn",
                      "Small fully convolutional net (3x3 convs, ReLU, "
                      "linear head) with hand-written double-precision "
                      "forward/backward.")
      .def(py::init([](const std::vector<int>& channels, uint64_t seed) {
             return TinyFcn(channels, seed);
           }),
           py::arg("channels"), py::arg("seed"),
           "channels = [3, hidden..., num_classes]; He-initialized from seed.")
      .def_static("default_shape", &TinyFcn::default_shape,
                  py::arg("num_classes"), py::arg("seed"),
                  "The training default: channels [3, 16, 16, num_classes].")
      .def_property_readonly("num_classes", &TinyFcn::num_classes)
      .def_property_readonly("parameter_count", &TinyFcn::parameter_count)
      .def("parameters",
           [](const TinyFcn& model) {
             std::vector<double> flat = model.parameters();
             py::array_t<double> arr(static_cast<py::ssize_t>(flat.size()));
             std::copy_n(flat.data(), flat.size(), arr.mutable_data());
             return arr;
           },
           "Flat parameter vector (weights then bias, layer by layer).")
      .def("set_parameters",
           [](TinyFcn& model, const DoubleArray& flat) {
             if (flat.ndim() != 1) {
               throw std::invalid_argument(
                   "set_parameters: expected a 1-D array");
             }
             model.set_parameters(std::span<const double>(
                 flat.data(), static_cast<size_t>(flat.shape(0))));
           },
           py::arg("flat"))
      .def("forward",
           [](const TinyFcn& model, const ByteArray& image) {
             return array_from_grid(model.forward(image_from_array(image)));
           },
           py::arg("image"), "Logits as a (height, width, classes) array.")
      .def("predict",
           [](const TinyFcn& model, const ByteArray& image) {
             const ImageU8 img = image_from_array(image);
             const LogitGrid logits = model.forward(img);
             MaskU8 mask(img.height, img.width);
             for (int p = 0; p < logits.pixels(); ++p) {
               const double* row = logits.pixel(p);
               int best = 0;
               for (int c = 1; c < logits.channels(); ++c) {
                 if (row[c] > row[best]) best = c;
               }
               mask.labels[p] = static_cast<uint8_t>(best);
             }
             return array_from_mask(mask);
           },
           py::arg("image"), "Argmax label mask for one image.")
      .def("save", &TinyFcn::save, py::arg("path"))
      .def_static("load", &TinyFcn::load, py::arg("path"));

  // ---- metrics ---------------------------------------------------------------

  m.def(
      "miou",
      [](const ByteArray& prediction, const ByteArray& ground_truth,
         int num_classes) {
        IouReport rep = miou(mask_from_array(prediction),
                             mask_from_array(ground_truth), num_classes);
        py::dict d;
        py::list per_class;
        for (size_t c = 0; c < rep.per_class.size(); ++c) {
          if (rep.defined[c]) {
            per_class.append(rep.per_class[c]);
          } else {
            per_class.append(py::none());
          }
        }
        d["per_class"] = per_class;
        d["mean"] = rep.mean;
        return d;
      },
      py::arg("prediction"), py::arg("ground_truth"), py::arg("num_classes"),
      "Per-class IoU and its mean over defined classes. Classes absent from "
      "both masks report None and are excluded from the mean.");

  // ---- synthetic scenes and image files ---------------------------------------

  m.def(
      "generate_scene",
      [](int size, double sigma, const std::string& shape, int fg_class,
         int num_classes, uint64_t seed, double min_coverage,
         double max_coverage, double texture_density) {
        SceneConfig config;
        config.size = size;
        config.sigma = sigma;
        config.shape = parse_shape(shape);
        config.fg_class = fg_class;
        config.num_classes = num_classes;
        config.palette = default_palette(num_classes - 1);
        config.min_coverage = min_coverage;
        config.max_coverage = max_coverage;
        config.texture_density = texture_density;
        return scene_to_dict(generate_scene(config, seed));
      },
      py::kw_only(), py::arg("size") = 48, py::arg("sigma") = 10.0,
      py::arg("shape") = "disk", py::arg("fg_class") = 1,
      py::arg("num_classes") = 4, py::arg("seed") = 0,
      py::arg("min_coverage") = 0.05, py::arg("max_coverage") = 0.13,
      py::arg("texture_density") = 0.03,
      "One noisy scene: background with distractor specks plus a single "
      "foreground shape. Returns {'image', 'mask', 'labels', 'num_classes', "
      "'seed'}.");

  m.def(
      "generate_dataset",
      [](int count, int size, int foreground_classes, double sigma,
         uint64_t seed) {
        SceneDataset ds =
            generate_dataset(count, size, foreground_classes, sigma, seed);
        py::list scenes;
        for (const SyntheticScene& scene : ds.scenes) {
          scenes.append(scene_to_dict(scene));
        }
        py::dict d;
        d["num_classes"] = ds.num_classes;
        d["scenes"] = scenes;
        return d;
      },
      py::arg("count"), py::kw_only(), py::arg("size") = 48,
      py::arg("foreground_classes") = 3, py::arg("sigma") = 10.0,
      py::arg("seed") = 7,
      "In-memory dataset cycling through the foreground classes; "
      "deterministic in the arguments.");

  m.def(
      "read_dataset",
      [](const std::filesystem::path& dir) {
        SceneDataset ds = read_dataset(dir);
        py::list scenes;
        for (const SyntheticScene& scene : ds.scenes) {
          scenes.append(scene_to_dict(scene));
        }
        py::dict d;
        d["num_classes"] = ds.num_classes;
        d["scenes"] = scenes;
        return d;
      },
      py::arg("dir"),
      "Load a dataset written by the CLI (scenes/NNNN.ppm, masks/NNNN.pgm, "
      "labels.csv).");

  m.def(
      "read_ppm",
      [](const std::filesystem::path& path) {
        return array_from_image(read_ppm(path));
      },
      py::arg("path"), "Binary PPM (P6, maxval 255) as a uint8 array.");
  m.def(
      "write_ppm",
      [](const ByteArray& image, const std::filesystem::path& path) {
        write_ppm(image_from_array(image), path);
      },
      py::arg("image"), py::arg("path"));
  m.def(
      "read_pgm",
      [](const std::filesystem::path& path) {
        return array_from_mask(read_pgm(path));
      },
      py::arg("path"), "Binary PGM (P5, maxval 255) as a uint8 array.");
  m.def(
      "write_pgm",
      [](const ByteArray& mask, const std::filesystem::path& path) {
        write_pgm(mask_from_array(mask), path);
      },
      py::arg("mask"), py::arg("path"));

  // ---- verification ------------------------------------------------------------

  m.def(
      "run_verify_suite",
      [](const std::string& suite, std::optional<uint64_t> seed) {
        uint64_t effective = seed.value_or(0);
        if (!seed) {
          if (suite == "prop31") effective = 2024;
          else if (suite == "gradients") effective = 2025;
          else if (suite == "prior") effective = 2026;
          else if (suite == "filter") effective = 2027;
          else if (suite == "equivalence") effective = 2028;
        }
        VerifyReport rep = run_verify_suite(suite, effective);
        py::list cases;
        for (const VerifyCase& c : rep.cases) {
          py::dict cd;
          cd["name"] = c.name;
          cd["value"] = c.value;
          cd["op"] = c.op;
          cd["threshold"] = c.threshold;
          cd["pass"] = c.pass;
          cases.append(cd);
        }
        py::dict d;
        d["suite"] = rep.suite;
        d["cases"] = cases;
        d["all_pass"] = rep.all_pass();
        return d;
      },
      py::arg("suite"), py::kw_only(), py::arg("seed") = py::none(),
      "Run one self-check suite ('prop31', 'gradients', 'prior', 'filter' "
      "or 'equivalence') and return its cases.");

  m.def("default_config_toml",
        []() { return config_to_toml(default_config()); },
        "The built-in configuration rendered as TOML.");
}
