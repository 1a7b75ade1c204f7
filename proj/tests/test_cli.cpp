#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "tactile/dataset/io.hpp"
#include "tactile/metrics.hpp"

using namespace tactile;
using test_support::read_bytes;
using test_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string err;
};

Result run(const TempDir& dir, const std::string& args) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(TACTILE_CLI) + " " + args + " >/dev/null 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_bytes(err)};
}

// Compares every data file; run snapshots under reports/ name their own paths.
bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    if (*rel.begin() == "reports") continue;
    if (!fs::exists(b / rel) || read_bytes(e.path()) != read_bytes(b / rel)) return false;
    ++n;
  }
  return n > 0;
}

}  // namespace

TEST_CASE("cli: usage errors exit with code 2") {
  TempDir dir("cli-usage");
  auto r = run(dir, "frobnicate");
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error[usage]: ", 0) == 0);
  r = run(dir, "synth --bogus-flag");
  CHECK(r.code == 2);
  r = run(dir, "");
  CHECK(r.code == 2);
}

TEST_CASE("cli: synth and split are byte-reproducible") {
  TempDir dir("cli-synth");
  const std::string a = (dir / "a").string(), b = (dir / "b").string();
  REQUIRE(run(dir, "synth --n 4 --zoom 16 --size 64 --seed 7 --out " + a).code == 0);
  REQUIRE(run(dir, "synth --n 4 --zoom 16 --size 64 --seed 7 --out " + b).code == 0);
  CHECK(same_tree(a, b));
  REQUIRE(run(dir, "split --dataset " + a + " --train 3 --test 1 --seed 2 --out " + a).code == 0);
  REQUIRE(run(dir, "split --dataset " + b + " --train 3 --test 1 --seed 2 --out " + b).code == 0);
  CHECK(same_tree(a, b));
  CHECK(fs::exists(dir / "a/reports/synth-run.txt"));
  CHECK(fs::exists(dir / "a/reports/split-run.txt"));
  const auto r = run(dir, "split --dataset " + a + " --train 4 --test 1 --out " + a);
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error[config]: ", 0) == 0);
}

TEST_CASE("cli: unknown configuration keys are rejected") {
  TempDir dir("cli-keys");
  const std::string d = (dir / "d").string();
  REQUIRE(run(dir, "synth --n 1 --size 32 --out " + d).code == 0);
  const auto r = run(dir, "train --dataset " + d + " --split any --set no_such_key=1 --out " + d);
  CHECK(r.code == 1);
  CHECK(r.err.find("no_such_key") != std::string::npos);
}

TEST_CASE("cli: train, eval refusal and report-diff") {
  TempDir dir("cli-train");
  const std::string d16 = (dir / "d16").string(), d17 = (dir / "d17").string(),
                    run_dir = (dir / "run").string();
  REQUIRE(run(dir, "synth --n 2 --zoom 16 --size 32 --out " + d16).code == 0);
  REQUIRE(run(dir, "synth --n 2 --zoom 17 --size 32 --out " + d17).code == 0);
  REQUIRE(run(dir, "train --dataset " + d16 + " --split any --epochs 1 --set g.depth=2 "
                   "--set g.base_channels=2 --set d.base_channels=2 --out " + run_dir).code == 0);
  const std::string ckpt = run_dir + "/checkpoints/final.ckpt";
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(run_dir + "/reports/loss.jsonl"));
  CHECK(fs::exists(run_dir + "/reports/train-config.txt"));

  const auto refused = run(dir, "eval --model " + ckpt + " --set " + d17 + " --out " + run_dir);
  CHECK(refused.code == 3);
  CHECK(refused.err.rfind("error[incompatible-zoom]: ", 0) == 0);
  CHECK_FALSE(fs::exists(run_dir + "/metrics/Zoom-16_d17.jsonl"));

  REQUIRE(run(dir, "eval --model " + ckpt + " --set " + d16 + " --name a --out " + run_dir).code == 0);
  const fs::path metrics = run_dir + "/metrics/Zoom-16_a.jsonl";
  REQUIRE(fs::exists(metrics));
  REQUIRE(run(dir, "report-diff --double " + metrics.string() + " --single " + metrics.string() +
                   " --out " + run_dir).code == 0);
  const auto diff = parse_report_csv(read_bytes(run_dir + "/reports/diff.csv"));
  REQUIRE(diff.diff.has_value());
  for (ClassId id : kFeatureClasses) {
    const auto cell = diff.diff->get(id, Statistic::Mean, Metric::IoU);
    if (cell) CHECK(*cell == 0.0);
  }

  REQUIRE(run(dir, "infer --model " + ckpt + " --input " + d16 + " --out " + run_dir).code == 0);
  CHECK(fs::exists(run_dir + "/images/synth-z16-000000_pred.png"));
  const auto pred_eval = run(dir, "eval --predictions " + run_dir + "/images --model-id Zoom-16 --set " +
                                      d16 + " --name b --out " + run_dir);
  CHECK(pred_eval.code == 0);
  CHECK(read_bytes(run_dir + "/metrics/Zoom-16_a.jsonl").size() > 0);
}

TEST_CASE("cli: fetch uses the in-process mock by default") {
  TempDir dir("cli-fetch");
  const std::string out = (dir / "f").string();
  REQUIRE(run(dir, "fetch --location \"Leeds, England, UK\" --zoom 17 --out " + out).code == 0);
  const auto records = dataset::read_manifest(dir / "f/manifests/pairs.jsonl");
  REQUIRE(records.size() == 1);
  CHECK(records[0].zoom == 17);
  const auto pair = dataset::load_pair(dir / "f", records[0]);
  CHECK(pair.tactile.width() == 512);
  if (!std::getenv("TACTILE_MAPS_API_KEY")) {
    const auto live = run(dir, "fetch --live --location x --out " + out);
    CHECK(live.code == 1);
    CHECK(live.err.find("TACTILE_MAPS_API_KEY") != std::string::npos);
  }
}
