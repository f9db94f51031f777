#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "nashae/config.hpp"
#include "nashae/dataset_io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(NASHAE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  const auto p = fs::temp_directory_path() / "nashae_test_cli";
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// A config small enough for sub-second training.
fs::path tiny_config(const fs::path& dir) {
  nashae::ExperimentSpec spec;
  spec.beam.frequencies = {2, 4};
  spec.beam.duty_cycle_count = 6;
  spec.beam.waveform_len = 24;
  spec.model.hidden = {8};
  spec.model.latent_dim = 3;
  spec.model.predictor_hidden = {6};
  spec.train.epochs = 2;
  spec.train.batch_size = 4;
  const auto path = dir / "tiny.json";
  nashae::save_spec(path, spec);
  return path;
}

}  // namespace

TEST_CASE("generate-data is deterministic and round trips") {
  const auto dir = scratch();
  const std::string common = " --seed 3 --length 40 --duty-cycles 10";
  REQUIRE(run("generate-data --out " + (dir / "a.csv").string() + common) == 0);
  REQUIRE(run("generate-data --out " + (dir / "b.csv").string() + common) == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(fs::exists(dir / "a.csv.json"));
  REQUIRE(run("generate-data --format bin --out " + (dir / "a.bin").string() + common) == 0);
  const auto csv = nashae::load_dataset(dir / "a.csv");
  const auto bin = nashae::load_dataset(dir / "a.bin");
  CHECK(csv.size() == 30);
  CHECK(csv.samples.cols() == 40);
  CHECK(csv.freq_label == bin.freq_label);
  CHECK(run("generate-data --out " + (dir / "c.csv").string() + " --seed 4 --length 40 --duty-cycles 10") == 0);
  CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
  fs::remove_all(dir);
}

TEST_CASE("train then eval") {
  const auto dir = scratch();
  const auto cfg = tiny_config(dir);
  REQUIRE(run("train --config " + cfg.string() + " --out " + (dir / "r1").string() + " --seed 7") == 0);
  REQUIRE(run("train --config " + cfg.string() + " --out " + (dir / "r2").string() + " --seed 7") == 0);
  for (const char* f : {"encoder.bin", "trace.csv", "latents.csv", "summary.json"}) {
    CHECK(slurp(dir / "r1" / f) == slurp(dir / "r2" / f));
  }
  REQUIRE(run("generate-data --out " + (dir / "d.csv").string() +
              " --frequencies 2,4 --duty-cycles 6 --length 24") == 0);
  REQUIRE(run("eval --model " + (dir / "r1").string() + " --data " + (dir / "d.csv").string() +
              " --metrics r2,count --out " + (dir / "m.json").string()) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "m.json"));
  CHECK(j.contains("r2"));
  CHECK(j.contains("learned_latents"));
  CHECK_FALSE(j.contains("tad"));

  REQUIRE(run("eval --latents " + (dir / "r1" / "latents.csv").string() + " --metrics tad,count --out " +
              (dir / "m2.json").string()) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "m2.json")).contains("tad"));

  // Wrong input width is a data error.
  REQUIRE(run("generate-data --out " + (dir / "w.csv").string() + " --length 30 --duty-cycles 6") == 0);
  CHECK(run("eval --model " + (dir / "r1").string() + " --data " + (dir / "w.csv").string() +
            " --metrics count --out " + (dir / "m3.json").string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("exit codes") {
  const auto dir = scratch();
  CHECK(run("") != 0);
  CHECK(run("no-such-command") == 2);
  CHECK(run("generate-data --out " + (dir / "x.csv").string() + " --format xml") == 2);
  CHECK(run("train --config " + (dir / "missing.json").string() + " --out " + (dir / "r").string()) == 3);
  std::ofstream(dir / "bad.json") << R"({"schema_version": 1, "train.lamda": 0.2})";
  CHECK(run("train --config " + (dir / "bad.json").string() + " --out " + (dir / "r").string()) == 2);
  CHECK(run("train --config " + tiny_config(dir).string() + " --lambda 1.0 --out " + (dir / "r").string()) == 2);
  CHECK(run("eval --model " + (dir / "nowhere").string() + " --data x.csv --out m.json") == 3);
  CHECK(run("eval --latents x.csv --metrics sap --out m.json") == 2);
  fs::remove_all(dir);
}
