#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "weakseg/image_io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "weakseg_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log = work_dir() / ("out_" + std::to_string(counter++) + ".log");
  const std::string cmd = std::string(WEAKSEG_CLI_PATH) + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = (status >= 256) ? (status >> 8) : status;

  std::ifstream in(log);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  res.output = buffer.str();
  return res;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("generate writes the dataset layout deterministically") {
  const fs::path ds = work_dir() / "ds";
  const RunResult res = run_cli("generate --out " + ds.string() +
                                " --count 6 --size 24 --classes 2 --seed 3");
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(ds / "scenes" / "0000.ppm"));
  CHECK(fs::exists(ds / "scenes" / "0005.ppm"));
  CHECK(fs::exists(ds / "masks" / "0005.pgm"));
  CHECK(fs::exists(ds / "labels.csv"));

  const auto labels = lines_of(read_text(ds / "labels.csv"));
  REQUIRE(labels.size() == 7);
  CHECK(labels[0] == "scene,labels");
  CHECK(labels[1] == "0000,0 1");
  CHECK(labels[2] == "0001,0 2");

  // Same flags, second directory: byte-identical scenes.
  const fs::path ds2 = work_dir() / "ds_again";
  REQUIRE(run_cli("generate --out " + ds2.string() +
                  " --count 6 --size 24 --classes 2 --seed 3")
              .exit_code == 0);
  CHECK(read_text(ds / "scenes" / "0004.ppm") ==
        read_text(ds2 / "scenes" / "0004.ppm"));
  CHECK(read_text(ds / "masks" / "0004.pgm") ==
        read_text(ds2 / "masks" / "0004.pgm"));

  // A different seed changes the pixels.
  const fs::path ds3 = work_dir() / "ds_seed";
  REQUIRE(run_cli("generate --out " + ds3.string() +
                  " --count 6 --size 24 --classes 2 --seed 4")
              .exit_code == 0);
  CHECK(read_text(ds / "scenes" / "0000.ppm") !=
        read_text(ds3 / "scenes" / "0000.ppm"));
}

TEST_CASE("train produces a checkpoint and a well-formed log") {
  const fs::path ds = work_dir() / "ds";
  const fs::path ckpt = work_dir() / "model.tfcn";
  const RunResult res =
      run_cli("train --data " + ds.string() + " --out " + ckpt.string() +
              " --steps 8 --lambda 0 --seed 2");
  REQUIRE(res.exit_code == 0);
  REQUIRE(fs::exists(ckpt));

  const fs::path log = fs::path(ckpt.string() + ".log.csv");
  REQUIRE(fs::exists(log));
  const auto rows = lines_of(read_text(log));
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == "step,class_loss,neighb_loss,total,lr");
  CHECK(rows[1].substr(0, 2) == "0,");

  // Re-running with identical flags reproduces the checkpoint byte for byte.
  const fs::path ckpt2 = work_dir() / "model2.tfcn";
  REQUIRE(run_cli("train --data " + ds.string() + " --out " + ckpt2.string() +
                  " --steps 8 --lambda 0 --seed 2")
              .exit_code == 0);
  CHECK(read_text(ckpt) == read_text(ckpt2));
}

TEST_CASE("train accepts a validation split and reports its miou") {
  const fs::path ds = work_dir() / "ds";
  const fs::path ckpt = work_dir() / "model_val.tfcn";
  const RunResult res =
      run_cli("train --data " + ds.string() + " --val " + ds.string() +
              " --out " + ckpt.string() + " --steps 5 --lambda 0 --seed 2");
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("val_miou=") != std::string::npos);
}

TEST_CASE("infer writes an argmax mask, optionally refined by mean field") {
  const fs::path ds = work_dir() / "ds";
  const fs::path ckpt = work_dir() / "model.tfcn";
  const fs::path image = ds / "scenes" / "0000.ppm";
  const fs::path pred = work_dir() / "pred.pgm";

  REQUIRE(run_cli("infer --ckpt " + ckpt.string() + " --image " +
                  image.string() + " --out " + pred.string())
              .exit_code == 0);
  const weakseg::MaskU8 mask = weakseg::read_pgm(pred);
  CHECK(mask.height == 24);
  CHECK(mask.width == 24);
  for (uint8_t l : mask.labels) CHECK(l < 3);

  const fs::path pred_mf = work_dir() / "pred_mf.pgm";
  REQUIRE(run_cli("infer --ckpt " + ckpt.string() + " --image " +
                  image.string() + " --out " + pred_mf.string() +
                  " --postprocess meanfield:2")
              .exit_code == 0);
  const weakseg::MaskU8 refined = weakseg::read_pgm(pred_mf);
  CHECK(refined.height == 24);

  // Explicit "none" matches the default output exactly.
  const fs::path pred_none = work_dir() / "pred_none.pgm";
  REQUIRE(run_cli("infer --ckpt " + ckpt.string() + " --image " +
                  image.string() + " --out " + pred_none.string() +
                  " --postprocess none")
              .exit_code == 0);
  CHECK(read_text(pred) == read_text(pred_none));
}

TEST_CASE("sweep emits one csv row per lambda") {
  const fs::path ds = work_dir() / "ds";
  const fs::path csv = work_dir() / "sweep.csv";
  const RunResult res = run_cli("sweep --data " + ds.string() + " --val " +
                                ds.string() + " --lambdas 0,0.2 --steps 4" +
                                " --out " + csv.string());
  REQUIRE(res.exit_code == 0);

  const auto rows = lines_of(read_text(csv));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "lambda,miou_mean,miou_bg,miou_fg1,miou_fg2");
  CHECK(rows[1].substr(0, 2) == "0,");
  CHECK(rows[2].substr(0, 4) == "0.2,");
  CHECK(res.output.find("lambda=0") != std::string::npos);
}

TEST_CASE("verify runs a suite and writes its cases as csv") {
  const fs::path csv = work_dir() / "verify.csv";
  const RunResult res =
      run_cli("verify --suite equivalence --out " + csv.string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.output.find("pass") != std::string::npos);

  const auto rows = lines_of(read_text(csv));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] == "name,value,op,threshold,pass");
}

TEST_CASE("a config file drives training and flags override it") {
  const fs::path ds = work_dir() / "ds";
  const fs::path cfg = work_dir() / "run.toml";
  std::ofstream(cfg) << "[train]\ntotal_steps = 3\n\n[loss]\nlambda = 0.0\n";

  const fs::path ckpt = work_dir() / "model_cfg.tfcn";
  const RunResult res = run_cli("train --data " + ds.string() + " --out " +
                                ckpt.string() + " --config " + cfg.string());
  REQUIRE(res.exit_code == 0);
  const auto rows = lines_of(read_text(fs::path(ckpt.string() + ".log.csv")));
  CHECK(rows.size() == 4);  // header + 3 steps from the config file

  // --steps wins over the config file.
  const fs::path ckpt2 = work_dir() / "model_cfg2.tfcn";
  REQUIRE(run_cli("train --data " + ds.string() + " --out " + ckpt2.string() +
                  " --config " + cfg.string() + " --steps 2")
              .exit_code == 0);
  CHECK(lines_of(read_text(fs::path(ckpt2.string() + ".log.csv"))).size() == 3);
}

TEST_CASE("usage errors exit with code 2 and a weakseg error line") {
  const RunResult missing = run_cli("train --out /tmp/x.tfcn");
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("weakseg: error:") != std::string::npos);

  const RunResult unknown = run_cli("explode");
  CHECK(unknown.exit_code == 2);

  const RunResult no_dir =
      run_cli("train --data /nonexistent_dir --out /tmp/x.tfcn --steps 1");
  CHECK(no_dir.exit_code == 2);
}

TEST_CASE("runtime failures exit with code 1 and a weakseg error line") {
  const fs::path ds = work_dir() / "ds";

  const RunResult bad_suite = run_cli("verify --suite nonsense");
  CHECK(bad_suite.exit_code == 1);
  CHECK(bad_suite.output.find("weakseg: error:") != std::string::npos);

  const RunResult bad_post =
      run_cli("infer --ckpt " + (work_dir() / "model.tfcn").string() +
              " --image " + (ds / "scenes" / "0000.ppm").string() +
              " --out /tmp/x.pgm --postprocess sharpen");
  CHECK(bad_post.exit_code == 1);
  CHECK(bad_post.output.find("weakseg: error:") != std::string::npos);

  const fs::path cfg = work_dir() / "bad.toml";
  std::ofstream(cfg) << "[loss]\nunknown_key = 1\n";
  const RunResult bad_cfg =
      run_cli("train --data " + ds.string() + " --out /tmp/x.tfcn --config " +
              cfg.string() + " --steps 1");
  CHECK(bad_cfg.exit_code == 1);
  CHECK(bad_cfg.output.find("weakseg: error:") != std::string::npos);
  CHECK(bad_cfg.output.find("unknown_key") != std::string::npos);
}

TEST_CASE("sweep rejects malformed lambda lists") {
  const fs::path ds = work_dir() / "ds";
  const RunResult res = run_cli("sweep --data " + ds.string() + " --val " +
                                ds.string() + " --lambdas 0,oops --steps 1 " +
                                "--out /tmp/s.csv");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("weakseg: error:") != std::string::npos);
}
