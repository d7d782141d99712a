// weakseg — command-line front end for the weakly supervised segmentation
// library. Subcommands:
//
//   generate   write a synthetic scene dataset to a directory
//   train      train the tiny FCN on a dataset and save a checkpoint
//   infer      run a checkpoint on one image, optionally mean-field refined
//   sweep      train/evaluate across a list of lambda values, emit a CSV
//   verify     run one of the built-in numerical verification suites
//
// Every subcommand is deterministic given its flags, config file, and seed.
// Exit code 0 means success; any failure prints a single line starting with
// "weakseg: error:" on stderr and exits nonzero.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "weakseg/config.hpp"
#include "weakseg/image_io.hpp"
#include "weakseg/meanfield.hpp"
#include "weakseg/metrics.hpp"
#include "weakseg/model.hpp"
#include "weakseg/synth.hpp"
#include "weakseg/train.hpp"
#include "weakseg/verify.hpp"

namespace {

using namespace weakseg;

// Shortest round-trip decimal for CSV fields and log lines.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Compact decimal for human-facing banners.
std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// Parsed sweep points, keeping the user's spelling for reports.
struct LambdaPoint {
  std::string text;
  double value = 0.0;
};

std::vector<LambdaPoint> parse_lambda_list(const std::string& text) {
  std::vector<LambdaPoint> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const size_t first = item.find_first_not_of(" \t");
    const size_t last = item.find_last_not_of(" \t");
    item = (first == std::string::npos) ? std::string()
                                        : item.substr(first, last - first + 1);
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) {
      throw std::invalid_argument("bad lambda value '" + item + "'");
    }
    out.push_back({item, v});
  }
  if (out.empty()) throw std::invalid_argument("empty lambda list");
  return out;
}

// Effective worker count: --jobs capped by WEAKSEG_THREADS (if set) and by
// the number of sweep points.
int effective_jobs(int requested, int points) {
  int jobs = std::max(1, requested);
  if (const char* env = std::getenv("WEAKSEG_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) jobs = std::min(jobs, cap);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("bad WEAKSEG_THREADS value '") +
                                  env + "'");
    }
  }
  return std::min(jobs, std::max(1, points));
}

void write_train_log_csv(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,class_loss,neighb_loss,total,lr\n";
  for (const TrainStepLog& s : log.steps) {
    out << s.step << ',' << fmt(s.class_loss) << ',' << fmt(s.neighb_loss)
        << ',' << fmt(s.total) << ',' << fmt(s.lr) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

struct ConfigFlags {
  CLI::Option* config = nullptr;
  CLI::Option* lambda = nullptr;
  CLI::Option* mode = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* steps = nullptr;
  std::string config_path;
  double lambda_value = 0.0;
  std::string mode_name;
  uint64_t seed_value = 0;
  int steps_value = 0;
};

// Config file first, then explicit flags on top.
RunConfig resolve_config(const ConfigFlags& flags) {
  RunConfig cfg = default_config();
  if (flags.config && flags.config->count() > 0) {
    merge_config_file(cfg, flags.config_path);
  }
  if (flags.lambda && flags.lambda->count() > 0) {
    cfg.loss.lambda = flags.lambda_value;
  }
  if (flags.mode && flags.mode->count() > 0) {
    cfg.loss.mode = parse_neighborhood_mode(flags.mode_name);
  }
  if (flags.seed && flags.seed->count() > 0) {
    cfg.train.seed = flags.seed_value;
  }
  if (flags.steps && flags.steps->count() > 0) {
    cfg.train.total_steps = flags.steps_value;
  }
  return cfg;
}

int cmd_generate(const std::string& out_dir, const RunConfig& cfg) {
  const SceneDataset dataset = generate_dataset(
      cfg.data.count, cfg.data.size, cfg.data.classes, cfg.data.sigma,
      cfg.data.seed);
  write_dataset(dataset, out_dir);

  std::vector<int> scenes_with_class(dataset.num_classes, 0);
  for (const SyntheticScene& scene : dataset.scenes) {
    for (int label : scene.labels.present()) ++scenes_with_class[label];
  }
  std::cout << "wrote " << dataset.scenes.size() << " scenes to " << out_dir
            << " (size " << cfg.data.size << "x" << cfg.data.size << ", "
            << dataset.num_classes << " classes)\n";
  for (int c = 0; c < dataset.num_classes; ++c) {
    std::cout << "class " << c << (c == 0 ? " (background)" : "") << ": "
              << scenes_with_class[c] << " scenes\n";
  }
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& val_dir,
              const std::string& ckpt_path, const std::string& log_path,
              const RunConfig& cfg) {
  const SceneDataset train_data = read_dataset(data_dir);
  std::optional<SceneDataset> val_data;
  if (!val_dir.empty()) val_data = read_dataset(val_dir);

  TinyFcn model =
      TinyFcn::default_shape(train_data.num_classes, cfg.train.seed);
  std::cout << "training on " << train_data.scenes.size() << " scenes, "
            << cfg.train.total_steps << " steps, lambda="
            << fmt_short(cfg.loss.lambda) << ", mode="
            << neighborhood_mode_name(cfg.loss.mode) << ", "
            << model.parameter_count() << " parameters\n";

  const int report_every = std::max(1, cfg.train.total_steps / 10);
  const TrainLog log = train_model(
      model, train_data, val_data ? &*val_data : nullptr, cfg.train, cfg.loss,
      cfg.kernel, cfg.prior.constraints(), cfg.prior.grid_size,
      [&](const TrainStepLog& s) {
        if ((s.step + 1) % report_every == 0 ||
            s.step + 1 == cfg.train.total_steps) {
          std::cout << "step " << (s.step + 1) << "/" << cfg.train.total_steps
                    << " class=" << fmt_short(s.class_loss)
                    << " neighb=" << fmt_short(s.neighb_loss)
                    << " total=" << fmt_short(s.total)
                    << " lr=" << fmt_short(s.lr) << "\n";
        }
      });

  model.save(ckpt_path);
  const std::string log_file =
      log_path.empty() ? ckpt_path + ".log.csv" : log_path;
  write_train_log_csv(log, log_file);
  std::cout << "checkpoint written to " << ckpt_path << "\n";
  std::cout << "training log written to " << log_file << "\n";
  if (val_data) {
    std::cout << "val_miou=" << fmt(log.evals.back().miou) << "\n";
  }
  return 0;
}

// "none", "meanfield" (defaults to 5 iterations), or "meanfield:K".
int parse_postprocess(const std::string& text) {
  if (text.empty() || text == "none") return 0;
  if (text == "meanfield") return 5;
  const std::string prefix = "meanfield:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string arg = text.substr(prefix.size());
    try {
      size_t used = 0;
      const int k = std::stoi(arg, &used);
      if (used == arg.size() && k >= 0) return k;
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument("bad --postprocess '" + text +
                              "' (expected none, meanfield, or meanfield:K)");
}

int cmd_infer(const std::string& ckpt_path, const std::string& image_path,
              const std::string& out_path, const std::string& postprocess,
              const RunConfig& cfg) {
  const int iterations = parse_postprocess(postprocess);
  const TinyFcn model = TinyFcn::load(ckpt_path);
  const ImageU8 image = read_ppm(image_path);
  const LogitGrid logits = model.forward(image);

  DistributionGrid q = softmax_grid(logits);
  if (iterations > 0) {
    // The model's per-pixel distribution enters as the unary potential; each
    // iteration is one parallel mean-field update under the pairwise kernel.
    LogitGrid unary(image.height, image.width, model.num_classes());
    for (int p = 0; p < q.pixels(); ++p) {
      for (int c = 0; c < q.channels(); ++c) {
        unary(p, c) = -std::log(q(p, c));
      }
    }
    PairwiseCrf crf{std::move(unary), cfg.kernel,
                    FeatureImage::from_image(image),
                    PotentialForm::AgreeReward, false};
    MeanFieldEngine engine(crf);
    for (int it = 0; it < iterations; ++it) q = engine.step(q);
  }

  MaskU8 mask(image.height, image.width);
  for (int p = 0; p < q.pixels(); ++p) {
    const double* f = q.pixel(p);
    int best = 0;
    for (int c = 1; c < q.channels(); ++c) {
      if (f[c] > f[best]) best = c;
    }
    mask.labels[p] = static_cast<uint8_t>(best);
  }
  write_pgm(mask, out_path);
  std::cout << "mask written to " << out_path;
  if (iterations > 0) std::cout << " (meanfield:" << iterations << ")";
  std::cout << "\n";
  return 0;
}

int cmd_sweep(const std::string& data_dir, const std::string& val_dir,
              const std::string& lambdas_text, const std::string& out_csv,
              int jobs_requested, const RunConfig& base_cfg) {
  const std::vector<LambdaPoint> lambdas = parse_lambda_list(lambdas_text);
  const SceneDataset train_data = read_dataset(data_dir);
  const SceneDataset val_data = read_dataset(val_dir);
  const int jobs = effective_jobs(jobs_requested,
                                  static_cast<int>(lambdas.size()));

  std::vector<IouReport> reports(lambdas.size());
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < lambdas.size();
         i = next.fetch_add(1)) {
      if (failed.load()) return;
      try {
        RunConfig cfg = base_cfg;
        cfg.loss.lambda = lambdas[i].value;
        TinyFcn model =
            TinyFcn::default_shape(train_data.num_classes, cfg.train.seed);
        train_model(model, train_data, nullptr, cfg.train, cfg.loss,
                    cfg.kernel, cfg.prior.constraints(), cfg.prior.grid_size,
                    nullptr);
        reports[i] = evaluate_model(model, val_data);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error(first_error);

  std::ofstream out(out_csv);
  if (!out) throw std::runtime_error("cannot write " + out_csv);
  out << "lambda,miou_mean,miou_bg";
  for (int c = 1; c < train_data.num_classes; ++c) out << ",miou_fg" << c;
  out << "\n";
  for (size_t i = 0; i < lambdas.size(); ++i) {
    const IouReport& r = reports[i];
    out << lambdas[i].text << ',' << fmt(r.mean);
    for (int c = 0; c < train_data.num_classes; ++c) {
      out << ',' << (r.defined[c] ? fmt(r.per_class[c]) : "nan");
    }
    out << "\n";
    std::cout << "lambda=" << lambdas[i].text << " miou=" << fmt(r.mean)
              << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + out_csv);
  std::cout << "sweep written to " << out_csv << " (" << jobs << " job"
            << (jobs == 1 ? "" : "s") << ")\n";
  return 0;
}

uint64_t default_suite_seed(const std::string& suite) {
  if (suite == "prop31") return 2024;
  if (suite == "gradients") return 2025;
  if (suite == "prior") return 2026;
  if (suite == "filter") return 2027;
  if (suite == "equivalence") return 2028;
  throw std::invalid_argument(
      "unknown suite '" + suite +
      "' (expected prop31, gradients, prior, filter, or equivalence)");
}

int cmd_verify(const std::string& suite, const std::string& out_csv,
               uint64_t seed, bool seed_given) {
  const uint64_t effective_seed = seed_given ? seed : default_suite_seed(suite);
  const VerifyReport report = run_verify_suite(suite, effective_seed);
  for (const VerifyCase& c : report.cases) {
    std::cout << (c.pass ? "pass" : "FAIL") << "  " << c.name << "  "
              << fmt(c.value) << " " << c.op << " " << fmt(c.threshold)
              << "\n";
  }
  if (!out_csv.empty()) {
    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot write " + out_csv);
    write_verify_csv(report, out);
    if (!out) throw std::runtime_error("failed writing " + out_csv);
  }
  int failures = 0;
  for (const VerifyCase& c : report.cases) failures += c.pass ? 0 : 1;
  if (failures > 0) {
    throw std::runtime_error("verify suite '" + suite + "' failed (" +
                             std::to_string(failures) + " of " +
                             std::to_string(report.cases.size()) + " cases)");
  }
  std::cout << "suite " << suite << ": all " << report.cases.size()
            << " cases pass\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised segmentation: training signals, filters, "
               "and verification suites"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  std::string gen_out;
  ConfigFlags gen_flags;
  int gen_count = 0, gen_size = 0, gen_classes = 0;
  double gen_sigma = 0.0;
  uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen_flags.config =
      gen->add_option("--config", gen_flags.config_path, "TOML config file")
          ->check(CLI::ExistingFile);
  auto* gen_count_opt = gen->add_option("--count", gen_count, "Scene count");
  auto* gen_size_opt = gen->add_option("--size", gen_size, "Image side length");
  auto* gen_sigma_opt =
      gen->add_option("--sigma", gen_sigma, "Pixel noise sigma");
  auto* gen_classes_opt =
      gen->add_option("--classes", gen_classes, "Foreground class count");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Dataset seed");

  // train
  auto* train = app.add_subcommand("train", "Train the tiny FCN");
  std::string train_data, train_val, train_out, train_log;
  ConfigFlags train_flags;
  train->add_option("--data", train_data, "Training dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  train->add_option("--val", train_val, "Optional validation dataset")
      ->check(CLI::ExistingDirectory);
  train->add_option("--out", train_out, "Checkpoint output path")->required();
  train->add_option("--log", train_log,
                    "Training log CSV (default: <out>.log.csv)");
  train_flags.config =
      train->add_option("--config", train_flags.config_path, "TOML config file")
          ->check(CLI::ExistingFile);
  train_flags.lambda = train->add_option("--lambda", train_flags.lambda_value,
                                         "Neighborhood loss weight");
  train_flags.mode = train->add_option(
      "--mode", train_flags.mode_name,
      "Neighborhood mode: weighted or exponentiated");
  train_flags.seed =
      train->add_option("--seed", train_flags.seed_value, "Training seed");
  train_flags.steps =
      train->add_option("--steps", train_flags.steps_value, "Total SGD steps");

  // infer
  auto* infer = app.add_subcommand("infer", "Run a checkpoint on one image");
  std::string infer_ckpt, infer_image, infer_out, infer_post;
  ConfigFlags infer_flags;
  infer->add_option("--ckpt", infer_ckpt, "Checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--image", infer_image, "Input PPM image")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--out", infer_out, "Output PGM mask")->required();
  infer->add_option("--postprocess", infer_post,
                    "none, meanfield, or meanfield:K (default none)");
  infer_flags.config =
      infer->add_option("--config", infer_flags.config_path, "TOML config file")
          ->check(CLI::ExistingFile);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Lambda sweep: train + evaluate");
  std::string sweep_data, sweep_val, sweep_lambdas, sweep_out;
  ConfigFlags sweep_flags;
  int sweep_jobs = 1;
  sweep->add_option("--data", sweep_data, "Training dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--val", sweep_val, "Validation dataset directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  sweep->add_option("--lambdas", sweep_lambdas,
                    "Comma-separated lambda values, e.g. 0,0.1,0.3")
      ->required();
  sweep->add_option("--out", sweep_out, "Output CSV path")->required();
  sweep->add_option("--jobs", sweep_jobs,
                    "Parallel jobs (capped by WEAKSEG_THREADS)");
  sweep_flags.config =
      sweep->add_option("--config", sweep_flags.config_path, "TOML config file")
          ->check(CLI::ExistingFile);
  sweep_flags.mode = sweep->add_option(
      "--mode", sweep_flags.mode_name,
      "Neighborhood mode: weighted or exponentiated");
  sweep_flags.seed =
      sweep->add_option("--seed", sweep_flags.seed_value, "Training seed");
  sweep_flags.steps =
      sweep->add_option("--steps", sweep_flags.steps_value, "Total SGD steps");

  // verify
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string verify_suite, verify_out;
  uint64_t verify_seed = 0;
  verify
      ->add_option("--suite", verify_suite,
                   "prop31, gradients, prior, filter, or equivalence")
      ->required();
  verify->add_option("--out", verify_out, "Report CSV path");
  auto* verify_seed_opt =
      verify->add_option("--seed", verify_seed, "Override the suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << "weakseg: error: " << e.what() << "\n";
      return 2;
    }
    return app.exit(e);  // --help and friends
  }

  try {
    if (*gen) {
      RunConfig cfg = resolve_config(gen_flags);
      if (gen_count_opt->count()) cfg.data.count = gen_count;
      if (gen_size_opt->count()) cfg.data.size = gen_size;
      if (gen_sigma_opt->count()) cfg.data.sigma = gen_sigma;
      if (gen_classes_opt->count()) cfg.data.classes = gen_classes;
      if (gen_seed_opt->count()) cfg.data.seed = gen_seed;
      return cmd_generate(gen_out, cfg);
    }
    if (*train) {
      return cmd_train(train_data, train_val, train_out, train_log,
                       resolve_config(train_flags));
    }
    if (*infer) {
      return cmd_infer(infer_ckpt, infer_image, infer_out, infer_post,
                       resolve_config(infer_flags));
    }
    if (*sweep) {
      return cmd_sweep(sweep_data, sweep_val, sweep_lambdas, sweep_out,
                       sweep_jobs, resolve_config(sweep_flags));
    }
    if (*verify) {
      return cmd_verify(verify_suite, verify_out, verify_seed,
                        verify_seed_opt->count() > 0);
    }
  } catch (const std::exception& e) {
    std::cerr << "weakseg: error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "weakseg: error: no subcommand\n";
  return 2;
}
