#include "adaptms/cli/cli.hpp"
#include "adaptms/eval/run_config.hpp"
#include "adaptms/model/snapshot.hpp"
#include "support.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace adaptms;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "adaptms");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

}  // namespace

TEST_CASE("print-default-config emits a loadable config") {
  const Result r = run({"print-default-config"});
  REQUIRE(r.code == cli::kExitOk);
  const auto cfg = eval::run_config_from_json(nlohmann::json::parse(r.out));
  CHECK(cfg.fingerprint() == eval::RunConfig::defaults().fingerprint());
}

TEST_CASE("exit codes") {
  TempDir dir("adaptms_cli_codes");
  CHECK(run({}).code == cli::kExitConfig);
  CHECK(run({"frobnicate"}).code == cli::kExitConfig);
  const Result missing = run({"generate", "--config", (dir.path / "none.json").string()});
  CHECK(missing.code == cli::kExitRuntime);

  const Result bad = run({"train", "--config", write_config(dir.path, {{"train", {{"lambda", -0.5}}}}).string()});
  CHECK(bad.code == cli::kExitConfig);
  CHECK(bad.err.find("train.lambda") != std::string::npos);

  const Result no_corpus = run({"evaluate", "--out", (dir.path / "empty").string()});
  CHECK(no_corpus.code == cli::kExitRuntime);
  CHECK(no_corpus.err.find("corpus") != std::string::npos);
}

TEST_CASE("generate is byte-reproducible and later stages check the fingerprint") {
  TempDir dir("adaptms_cli_pipeline");
  const fs::path cfg = write_config(dir.path, eval::to_json(testing::small_config()));
  const std::string out1 = (dir.path / "one").string();
  const std::string out2 = (dir.path / "two").string();
  const Result g1 = run({"generate", "--config", cfg.string(), "--out", out1});
  REQUIRE(g1.code == 0);
  CHECK(g1.out.find("Missing Behav.") != std::string::npos);
  REQUIRE(run({"generate", "--config", cfg.string(), "--out", out2, "--quiet"}).code == 0);
  CHECK(slurp(fs::path(out1) / "corpus.tsv") == slurp(fs::path(out2) / "corpus.tsv"));

  // A different seed is a different config; its outputs would not match this corpus.
  const Result mismatch = run({"train", "--config", cfg.string(), "--out", out1, "--seed", "9", "--quiet"});
  CHECK(mismatch.code == cli::kExitRuntime);
  CHECK(mismatch.err.find("generated under config") != std::string::npos);

  REQUIRE(run({"train", "--config", cfg.string(), "--out", out1, "--quiet"}).code == 0);
  REQUIRE(run({"train", "--config", cfg.string(), "--out", out2, "--quiet"}).code == 0);
  const std::string snap = slurp(fs::path(out1) / "model.snap");
  CHECK(snap == slurp(fs::path(out2) / "model.snap"));
  const auto parsed = model::parse_snapshot(snap);
  CHECK(parsed.config_fingerprint == testing::small_config().fingerprint());
  const auto log = nlohmann::json::parse(slurp(fs::path(out1) / "train_log.json"));
  CHECK(log["config_fingerprint"] == parsed.config_fingerprint);
  CHECK(log["epochs"].size() >= 2);

  REQUIRE(run({"evaluate", "--config", cfg.string(), "--out", out1, "--quiet"}).code == 0);
  REQUIRE(run({"evaluate", "--config", cfg.string(), "--out", out2, "--quiet"}).code == 0);
  for (const char* f : {"unsupervised.csv", "unsupervised.json", "fewshot.csv", "pairwise.csv"}) {
    INFO(f);
    CHECK(slurp(fs::path(out1) / f) == slurp(fs::path(out2) / f));
  }
  const std::string csv = slurp(fs::path(out1) / "unsupervised.csv");
  for (const char* v : {"source_only", "pool_noadapt", "dann_only", "adaptms"}) CHECK(csv.find(v) != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 variants x 1 seed
  CHECK(csv.find(testing::small_config().fingerprint()) != std::string::npos);

  REQUIRE(run({"ablate", "--config", cfg.string(), "--out", out1, "--quiet"}).code == 0);
  CHECK(fs::exists(fs::path(out1) / "ablation.csv"));
  REQUIRE(run({"sweep", "--config", cfg.string(), "--out", out1, "--quiet"}).code == 0);
  CHECK(fs::exists(fs::path(out1) / "lambda_sweep.json"));
  CHECK(fs::exists(fs::path(out1) / "hyperparameter_search.csv"));
}
