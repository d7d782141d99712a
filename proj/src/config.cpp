#include "weakseg/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace weakseg {

RunConfig default_config() { return RunConfig{}; }

namespace {

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& message) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " +
                              message);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strip a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

struct Value {
  std::string raw;
  std::string origin;
  int line = 0;

  double as_double() const {
    try {
      size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      fail(origin, line, "expected a number, got '" + raw + "'");
    }
  }

  int as_int() const {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || ptr != raw.data() + raw.size()) {
      fail(origin, line, "expected an integer, got '" + raw + "'");
    }
    return v;
  }

  uint64_t as_u64() const {
    uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || ptr != raw.data() + raw.size()) {
      fail(origin, line, "expected an unsigned integer, got '" + raw + "'");
    }
    return v;
  }

  bool as_bool() const {
    if (raw == "true") return true;
    if (raw == "false") return false;
    fail(origin, line, "expected true or false, got '" + raw + "'");
  }

  std::string as_string() const {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
      return raw.substr(1, raw.size() - 2);
    }
    fail(origin, line, "expected a double-quoted string, got '" + raw + "'");
  }
};

}  // namespace

void merge_config_text(RunConfig& config, const std::string& text,
                       const std::string& origin) {
  std::istringstream stream(text);
  std::string raw_line;
  std::string section;
  int line_no = 0;

  while (std::getline(stream, raw_line)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw_line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "kernel" && section != "prior" && section != "loss" &&
          section != "neighborhood" && section != "train" && section != "data") {
        fail(origin, line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(origin, line_no, "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    Value value{trim(line.substr(eq + 1)), origin, line_no};
    if (key.empty() || value.raw.empty()) {
      fail(origin, line_no, "expected key = value");
    }
    if (section.empty()) {
      fail(origin, line_no, "key '" + key + "' outside any section");
    }

    if (section == "kernel") {
      if (key == "w1") config.kernel.w1 = value.as_double();
      else if (key == "w2") config.kernel.w2 = value.as_double();
      else if (key == "theta_alpha") config.kernel.theta_alpha = value.as_double();
      else if (key == "theta_beta") config.kernel.theta_beta = value.as_double();
      else if (key == "theta_gamma") config.kernel.theta_gamma = value.as_double();
      else if (key == "downscale") config.kernel.downscale = value.as_int();
      else fail(origin, line_no, "unknown key kernel." + key);
    } else if (section == "prior") {
      if (key == "c_background") config.prior.c_background = value.as_double();
      else if (key == "c_foreground") config.prior.c_foreground = value.as_double();
      else if (key == "grid_size") config.prior.grid_size = value.as_int();
      else fail(origin, line_no, "unknown key prior." + key);
    } else if (section == "loss" || section == "neighborhood") {
      // [neighborhood] mode = ... is an accepted alias for loss.mode.
      if (key == "mode") {
        config.loss.mode = parse_neighborhood_mode(value.as_string());
      } else if (section == "neighborhood") {
        fail(origin, line_no, "unknown key neighborhood." + key);
      } else if (key == "lambda") {
        config.loss.lambda = value.as_double();
      } else if (key == "normalize_per_pixel") {
        config.loss.normalize_per_pixel = value.as_bool();
      } else if (key == "use_prior") {
        config.loss.use_prior = value.as_bool();
      } else if (key == "stop_gradient") {
        config.loss.stop_gradient = value.as_bool();
      } else {
        fail(origin, line_no, "unknown key loss." + key);
      }
    } else if (section == "train") {
      if (key == "lr") config.train.lr = value.as_double();
      else if (key == "momentum") config.train.momentum = value.as_double();
      else if (key == "weight_decay") config.train.weight_decay = value.as_double();
      else if (key == "halve_every") config.train.halve_every = value.as_int();
      else if (key == "total_steps") config.train.total_steps = value.as_int();
      else if (key == "batch_size") config.train.batch_size = value.as_int();
      else if (key == "seed") config.train.seed = value.as_u64();
      else if (key == "eval_every") config.train.eval_every = value.as_int();
      else fail(origin, line_no, "unknown key train." + key);
    } else if (section == "data") {
      if (key == "size") config.data.size = value.as_int();
      else if (key == "sigma") config.data.sigma = value.as_double();
      else if (key == "classes") config.data.classes = value.as_int();
      else if (key == "count") config.data.count = value.as_int();
      else if (key == "seed") config.data.seed = value.as_u64();
      else fail(origin, line_no, "unknown key data." + key);
    }
  }
}

void merge_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  merge_config_text(config, buffer.str(), path.string());
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig config = default_config();
  merge_config_file(config, path);
  return config;
}

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  // Bare integers would parse as TOML ints; keep them valid as floats too.
  return out.str();
}

}  // namespace

std::string config_to_toml(const RunConfig& c) {
  std::ostringstream out;
  out << "[kernel]\n"
      << "w1 = " << fmt(c.kernel.w1) << "\n"
      << "w2 = " << fmt(c.kernel.w2) << "\n"
      << "theta_alpha = " << fmt(c.kernel.theta_alpha) << "\n"
      << "theta_beta = " << fmt(c.kernel.theta_beta) << "\n"
      << "theta_gamma = " << fmt(c.kernel.theta_gamma) << "\n"
      << "downscale = " << c.kernel.downscale << "\n\n"
      << "[prior]\n"
      << "c_background = " << fmt(c.prior.c_background) << "\n"
      << "c_foreground = " << fmt(c.prior.c_foreground) << "\n"
      << "grid_size = " << c.prior.grid_size << "\n\n"
      << "[loss]\n"
      << "lambda = " << fmt(c.loss.lambda) << "\n"
      << "mode = \"" << neighborhood_mode_name(c.loss.mode) << "\"\n"
      << "normalize_per_pixel = " << (c.loss.normalize_per_pixel ? "true" : "false")
      << "\n"
      << "use_prior = " << (c.loss.use_prior ? "true" : "false") << "\n"
      << "stop_gradient = " << (c.loss.stop_gradient ? "true" : "false") << "\n\n"
      << "[train]\n"
      << "lr = " << fmt(c.train.lr) << "\n"
      << "momentum = " << fmt(c.train.momentum) << "\n"
      << "weight_decay = " << fmt(c.train.weight_decay) << "\n"
      << "halve_every = " << c.train.halve_every << "\n"
      << "total_steps = " << c.train.total_steps << "\n"
      << "batch_size = " << c.train.batch_size << "\n"
      << "seed = " << c.train.seed << "\n"
      << "eval_every = " << c.train.eval_every << "\n\n"
      << "[data]\n"
      << "size = " << c.data.size << "\n"
      << "sigma = " << fmt(c.data.sigma) << "\n"
      << "classes = " << c.data.classes << "\n"
      << "count = " << c.data.count << "\n"
      << "seed = " << c.data.seed << "\n";
  return out.str();
}

}  // namespace weakseg
