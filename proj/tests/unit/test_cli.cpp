#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(D2D_TEST_TMPDIR) / "cli_tmp";

int run(const std::string& args) {
  const std::string cmd =
      std::string("\"") + D2D_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  std::ofstream(p) << body;
  return p;
}

const char* kTiny = R"({
  "seed": 5,
  "topology": {"cells": 1, "pairs_per_cell": 2},
  "channel": {"shadowing": false},
  "network": {"channels": 2, "width": 8, "depth": 2},
  "train": {"n_epoch": 12, "batch_size": 4, "lr": 0.001},
  "eval": {"n_drops": 20, "grid_step_m": 50},
  "oracle": {"levels": 8, "direct_iterations": 50}
})";

long lines(const std::string& s) {
  long n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("train") == 1);
}

TEST_CASE("config errors") {
  const fs::path bad = write_config("bad.json", R"({"nope": 1})");
  CHECK(run("train --config " + bad.string() + " --out-dir " + (kRoot / "bad").string()) == 2);
  const fs::path invalid = write_config("invalid.json", R"({"topology": {"cells": 4}})");
  CHECK(run("train --config " + invalid.string() + " --out-dir " + (kRoot / "bad").string()) == 2);
}

TEST_CASE("train, eval, powermap, oracle, gradcheck") {
  const fs::path cfg = write_config("tiny.json", kTiny);
  const fs::path out = kRoot / "run_a";
  fs::remove_all(out);
  REQUIRE(run("train --config " + cfg.string() + " --out-dir " + out.string()) == 0);
  const std::string metrics = slurp(out / "metrics.csv");
  CHECK(lines(metrics) == 13);
  CHECK(metrics.rfind("iteration,cost_total,mean_eta,ct_p,ct_if,pmax_violation_rate,q_exceed_rate", 0) == 0);
  CHECK(fs::exists(out / "timing.csv"));
  CHECK(fs::exists(out / "checkpoint.bin"));
  CHECK(fs::exists(out / "config.json"));

  CHECK(run("eval --config " + cfg.string() + " --out-dir " + out.string()) == 0);
  CHECK(slurp(out / "eval.txt").find("mean_eta") != std::string::npos);
  CHECK(run("powermap --config " + cfg.string() + " --out-dir " + out.string()) == 0);
  CHECK(lines(slurp(out / "powermap.csv")) > 10);
  CHECK(run("oracle --config " + cfg.string() + " --out-dir " + out.string()) == 0);
  CHECK(slurp(out / "oracle.csv").find("grid") != std::string::npos);
  CHECK(run("gradcheck --config " + cfg.string() + " --out-dir " + out.string()) == 0);
}

TEST_CASE("reruns are byte identical") {
  const fs::path cfg = write_config("tiny.json", kTiny);
  const fs::path a = kRoot / "det_a";
  const fs::path b = kRoot / "det_b";
  REQUIRE(run("train --config " + cfg.string() + " --out-dir " + a.string()) == 0);
  REQUIRE(run("train --config " + cfg.string() + " --out-dir " + b.string() + " --threads 3") == 0);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "checkpoint.bin") == slurp(b / "checkpoint.bin"));
}

TEST_CASE("checkpoint problems") {
  const fs::path cfg = write_config("tiny.json", kTiny);
  const fs::path empty = kRoot / "no_ckpt";
  fs::remove_all(empty);
  CHECK(run("eval --config " + cfg.string() + " --out-dir " + empty.string()) == 3);

  const fs::path out = kRoot / "shape";
  REQUIRE(run("train --config " + cfg.string() + " --out-dir " + out.string()) == 0);
  std::string other = kTiny;
  other.replace(other.find("\"width\": 8"), 10, "\"width\": 9");
  const fs::path cfg2 = write_config("wide.json", other);
  CHECK(run("eval --config " + cfg2.string() + " --out-dir " + out.string()) == 4);

  const fs::path junk = kRoot / "junk.bin";
  std::ofstream(junk) << "garbage";
  CHECK(run("eval --config " + cfg.string() + " --out-dir " + out.string() + " --checkpoint " +
            junk.string()) == 4);
}

TEST_CASE("oversized grid search") {
  std::string big = kTiny;
  big.replace(big.find("\"pairs_per_cell\": 2"), 19, "\"pairs_per_cell\": 6");
  const fs::path cfg = write_config("big.json", big);
  CHECK(run("oracle --config " + cfg.string() + " --out-dir " + (kRoot / "big").string()) == 7);
}
