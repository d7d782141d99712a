#pragma once

#include <filesystem>
#include <string>

#include "weakseg/kernel.hpp"
#include "weakseg/losses.hpp"
#include "weakseg/train.hpp"

namespace weakseg {

struct PriorConfig {
  double c_background = 0.4;
  double c_foreground = 0.2;
  int grid_size = 1001;

  PriorConstraints constraints() const {
    return PriorConstraints(c_background, c_foreground);
  }
};

struct DataConfig {
  int size = 48;
  double sigma = 10.0;
  int classes = 3;  // foreground classes; label universe is classes + 1
  int count = 200;
  uint64_t seed = 7;
};

// Every tunable in one place. The shipped configs/default.toml mirrors these
// values; config files override field by field.
struct RunConfig {
  KernelParams kernel;
  PriorConfig prior;
  LossConfig loss;
  TrainConfig train;
  DataConfig data;
};

// Defaults above, without reading any file.
RunConfig default_config();

// Minimal TOML subset: [section] headers, key = value with integer, float,
// boolean or double-quoted string values, full-line or trailing # comments.
// Unknown sections or keys are errors (with line numbers), as are malformed
// values. Recognized sections: [kernel], [prior], [loss], [train], [data];
// [neighborhood] mode = ... is accepted as an alias for loss.mode.
void merge_config_file(RunConfig& config, const std::filesystem::path& path);
void merge_config_text(RunConfig& config, const std::string& text,
                       const std::string& origin = "<string>");

RunConfig load_config(const std::filesystem::path& path);

// Render a config as TOML (the exact subset the parser accepts).
std::string config_to_toml(const RunConfig& config);

}  // namespace weakseg
