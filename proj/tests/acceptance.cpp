// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "adaptms/calib/calibration.hpp"
#include "adaptms/calib/fewshot.hpp"
#include "adaptms/cli/cli.hpp"
#include "adaptms/data/corpus_io.hpp"
#include "adaptms/data/generate.hpp"
#include "adaptms/eval/benchmark.hpp"
#include "adaptms/eval/protocols.hpp"
#include "adaptms/model/snapshot.hpp"
#include "adaptms/nn/batchnorm.hpp"
#include "adaptms/nn/dense.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace adaptms;
using eval::Variant;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, Outcome& o) {
  if (!o.pass) ++failures;
  std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << title << ": " << o.detail.str()
            << std::endl;
}

void run_guarded(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  report(id, title, o);
}

// ---------------------------------------------------------------- 1

void gradient_suite(Outcome& o) {
  const auto t0 = Clock::now();
  const auto dims = testing::tiny_dims();
  double worst = 0.0;

  // Standalone layers.
  {
    util::Rng rng(1);
    nn::BatchNormState bn = nn::BatchNormState::init(4);
    for (auto& v : bn.gamma) v = rng.uniform(0.5, 1.5);
    nn::Matrix x(9, 4);
    for (auto& v : x.values()) v = rng.normal();
    nn::Matrix w(9, 4);
    for (auto& v : w.values()) v = rng.normal();
    auto loss = [&] {
      nn::BatchNormState copy = bn;
      const nn::Matrix y = nn::batchnorm_forward(copy, x, nn::Mode::train);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * w.values()[i];
      return s;
    };
    nn::BatchNormCache cache;
    nn::BatchNormState copy = bn;
    nn::batchnorm_forward(copy, x, nn::Mode::train, &cache);
    const auto g = nn::batchnorm_backward(bn, cache, w);
    const nn::GradBlock blocks[] = {{"bn.gamma", std::span(bn.gamma), std::span(g.gamma_grad)},
                                    {"bn.beta", std::span(bn.beta), std::span(g.beta_grad)},
                                    {"bn.input", x.values(), g.input_grad.values()}};
    worst = std::max(worst, nn::finite_diff_check(loss, blocks).max_rel_error());
  }

  // Every trainable block of the composite adversarial objective, with dropout, at two
  // lambdas. Labeled rows cover all platforms so every calibration pair is exercised.
  std::size_t blocks_checked = 0;
  for (double lambda : {0.0, 0.5}) {
    model::ModelParams p = testing::gradcheck_params(dims, 11);
    const auto labeled = testing::random_batch(15, dims, {0, 1, 2}, true, 12);
    const auto unlabeled = testing::random_batch(9, dims, {2}, false, 13);
    const auto r = testing::model_gradcheck(p, labeled, unlabeled, lambda, 0.2);
    worst = std::max(worst, r.max_rel_error());
    blocks_checked += r.blocks.size();
    if (r.max_rel_error() >= 1e-5) o.detail << r.to_string();
  }
  for (model::ModelOptions opt : {model::ModelOptions{false, true}, model::ModelOptions{true, false}}) {
    model::ModelParams p = testing::gradcheck_params(dims, 14, opt);
    const auto r = testing::model_gradcheck(p, testing::random_batch(10, dims, {0, 1}, true, 15),
                                            testing::random_batch(6, dims, {2}, false, 16), 0.3, 0.1);
    worst = std::max(worst, r.max_rel_error());
  }

  // Gradient reversal: the encoder's domain gradient equals -lambda times the finite
  // difference of the unreversed domain loss.
  double grl_worst = 0.0;
  {
    model::ModelParams p = testing::perturbed_params(dims, 21);
    const auto labeled = testing::random_batch(10, dims, {0, 1}, true, 22);
    const auto unlabeled = testing::random_batch(10, dims, {2}, false, 23);
    auto grads_at = [&](double lambda) {
      model::ModelParams q = p;
      return model::compute_gradients(q, labeled, &unlabeled, {lambda, 0.0, nn::Mode::train}, nullptr).grads;
    };
    const model::ModelParams g0 = grads_at(0.0);
    for (double lambda : {0.1, 0.5, 1.0}) {
      const model::ModelParams gl = grads_at(lambda);
      const auto v0 = g0.trainable();
      const auto vl = gl.trainable();
      auto views = p.trainable();
      std::vector<std::vector<double>> unreversed;
      std::vector<nn::GradBlock> blocks;
      unreversed.reserve(views.size());
      for (std::size_t b = 0; b < views.size(); ++b) {
        if (model::block_group(views[b].name) != model::BlockGroup::encoder) continue;
        std::vector<double> d(vl[b].values.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (vl[b].values[i] - v0[b].values[i]) / -lambda;
        unreversed.push_back(std::move(d));
        blocks.push_back({views[b].name, views[b].values, unreversed.back()});
      }
      auto domain_loss = [&] {
        return model::compute_losses(p, labeled, &unlabeled, {0.0, 0.0, nn::Mode::train}, nullptr).domain;
      };
      grl_worst = std::max(grl_worst, nn::finite_diff_check(domain_loss, blocks).max_rel_error());
    }
  }
  const double secs = seconds_since(t0);
  o.require(worst < 1e-5, "block gradients rel err < 1e-5");
  o.require(grl_worst < 1e-5, "GRL identity rel err < 1e-5");
  o.require(secs < 30.0, "runtime < 30 s");
  o.detail << "max rel err " << fmt(worst, 3) << " over " << blocks_checked << " block checks (+ablations, batchnorm); "
           << "GRL identity max rel err " << fmt(grl_worst, 3) << " at lambda {0.1,0.5,1.0}; " << fmt(secs, 3) << " s";
}

// ---------------------------------------------------------------- 2

void calibration_exactness(Outcome& o) {
  // Noiseless generated target: labels are an exact affine map of the latent score.
  auto specs = data::standard_platform_specs();
  auto& c = specs[2];
  c.rating_noise_sd = 0.0;
  const data::Corpus corpus = data::generate_corpus(specs, 4000, 5);
  std::vector<double> s, y;
  for (const auto& x : corpus.instances) {
    const double raw = 4.0 * c.rating_alpha * x.latent + c.rating_beta;
    if (x.platform == 2 && raw > 1.0 && raw < 5.0) {
      s.push_back(x.latent);
      y.push_back(x.label);
    }
  }
  const auto map = calib::fit_unsupervised(s, calib::TargetRatingStats::from_ratings(y));
  const double a_err = std::abs(map.scale - 4.0 * c.rating_alpha);
  const double b_err = std::abs(map.bias - c.rating_beta);
  double se = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) se += std::pow(map.scale * s[i] + map.bias - y[i], 2);
  const double post_rmse = std::sqrt(se / static_cast<double>(s.size()));
  o.require(a_err < 1e-9 && b_err < 1e-9, "(a, b) recovered to 1e-9");
  o.require(post_rmse < 1e-9, "post-calibration RMSE < 1e-9");

  // Moment identity on arbitrary prediction vectors.
  double moment_err = 0.0;
  util::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(50 + trial * 37);
    for (auto& v : p) v = rng.normal(rng.uniform(-3, 3), rng.uniform(0.01, 2.0));
    const calib::TargetRatingStats st{rng.uniform(1, 5), rng.uniform(0.1, 1.5)};
    const auto m = calib::fit_unsupervised(p, st);
    double mean = 0.0, ss = 0.0;
    for (double v : p) mean += (m.scale * v + m.bias) / static_cast<double>(p.size());
    for (double v : p) ss += std::pow(m.scale * v + m.bias - mean, 2);
    moment_err = std::max({moment_err, std::abs(mean - st.hist_mean),
                           std::abs(std::sqrt(ss / static_cast<double>(p.size())) - st.hist_sd)});
  }
  o.require(moment_err < 1e-12, "moment identity to 1e-12");

  const double hand[] = {4.10 - 0.85, 4.10 + 0.85};
  const auto h = calib::fit_unsupervised(hand, {4.70, 0.55});
  o.require(std::abs(h.scale - 0.647059) < 1e-6 && std::abs(h.bias - 2.047059) < 1e-6, "hand case");
  o.detail << "generated target (" << s.size() << " unclipped rows): |da| " << fmt(a_err, 2) << ", |db| " << fmt(b_err, 2)
           << ", RMSE " << fmt(post_rmse, 2) << "; moment identity err " << fmt(moment_err, 2) << "; hand case ("
           << fmt(h.scale, 7) << ", " << fmt(h.bias, 7) << ")";
}

// ---------------------------------------------------------------- benchmark

struct Benchmark {
  eval::RunConfig config = eval::RunConfig::defaults();
  data::Corpus raw;
  std::unique_ptr<eval::BenchmarkData> data;
  std::unique_ptr<eval::Harness> harness;
  std::vector<eval::EvalReport> reports;
  std::vector<double> disc_seconds;  // training time of the lambda 0 and 0.5 models, per seed
  double total_seconds = 0.0;
  std::string error;
};

Benchmark run_benchmark() {
  Benchmark b;
  try {
    const auto t0 = Clock::now();
    const auto& g = b.config.generate;
    b.raw = data::generate_corpus(g.specs, g.n_per_platform, g.seed);
    b.raw.config_fingerprint = b.config.fingerprint();
    b.data = std::make_unique<eval::BenchmarkData>(eval::BenchmarkData::prepare(b.raw, b.config.embed));
    b.harness = std::make_unique<eval::Harness>(*b.data, b.config);
    auto& h = *b.harness;
    for (std::uint64_t seed : b.config.protocol.seeds) {
      const double before = h.training_seconds();
      h.model(h.recipe(b.config.protocol.main, 0.0, seed));
      h.model(h.recipe(b.config.protocol.main, 0.5, seed));
      b.disc_seconds.push_back(h.training_seconds() - before);
    }
    b.reports = eval::run_full_benchmark(h);
    b.total_seconds = seconds_since(t0);
    std::cout << "benchmark: " << h.models_trained() << " models, " << fmt(b.total_seconds, 4) << " s total, "
              << fmt(h.training_seconds(), 4) << " s training" << std::endl;
    for (const auto& r : b.reports) std::cout << r.name << '\n' << eval::format_table(r);
    std::cout << std::flush;
  } catch (const std::exception& e) {
    b.error = e.what();
  }
  return b;
}

const eval::EvalReport& find_report(const Benchmark& b, const std::string& name) {
  for (const auto& r : b.reports) {
    if (r.name == name) return r;
  }
  throw std::runtime_error("missing report " + name);
}

void require_benchmark(const Benchmark& b) {
  if (!b.error.empty()) throw std::runtime_error("benchmark failed: " + b.error);
}

// ---------------------------------------------------------------- 3

void alignment_effect(const Benchmark& b, Outcome& o) {
  require_benchmark(b);
  auto& h = *b.harness;
  const double chance = 1.0 / static_cast<double>(b.config.generate.specs.size());
  for (std::size_t i = 0; i < b.config.protocol.seeds.size(); ++i) {
    const std::uint64_t seed = b.config.protocol.seeds[i];
    const double acc0 = h.disc_accuracy(h.model(h.recipe(b.config.protocol.main, 0.0, seed)).params);
    const double acc5 = h.disc_accuracy(h.model(h.recipe(b.config.protocol.main, 0.5, seed)).params);
    o.require(acc0 >= 0.90, "seed " + std::to_string(seed) + " lambda=0 accuracy >= 0.90");
    o.require(acc5 <= chance + 0.10, "seed " + std::to_string(seed) + " lambda=0.5 accuracy <= chance+0.10");
    o.require(b.disc_seconds[i] < 180.0, "seed " + std::to_string(seed) + " under 3 min");
    o.detail << "seed " << seed << ": " << fmt(acc0) << " / " << fmt(acc5) << " (" << fmt(b.disc_seconds[i], 3)
             << " s); ";
  }
  o.detail << "held-out accuracy at lambda 0 / 0.5 over all platforms' test splits, chance " << fmt(chance);
}

// ---------------------------------------------------------------- 4

void unsupervised_ordering(const Benchmark& b, Outcome& o) {
  require_benchmark(b);
  const auto& r = find_report(b, "unsupervised");
  const std::string setting = eval::transfer_label(b.config.protocol.main, b.config.generate.specs);
  auto mean = [&](const char* v) { return r.cell(v, setting).rmse.mean; };
  const double ad = mean("adaptms"), da = mean("dann_only"), po = mean("pool_noadapt"), so = mean("source_only");
  o.require(ad < da, "adaptms < dann_only");
  o.require(da < po, "dann_only < pool_noadapt");
  o.require(po <= so, "pool_noadapt <= source_only");
  o.require(da - ad >= 0.02, "adaptms beats dann_only by >= 0.02");
  o.detail << setting << " mean RMSE: adaptms " << fmt(ad) << ", dann_only " << fmt(da) << ", pool_noadapt " << fmt(po)
           << ", source_only " << fmt(so) << "; gap " << fmt(da - ad, 3);
}

// ---------------------------------------------------------------- 5

void fewshot_adaptation(const Benchmark& b, Outcome& o) {
  require_benchmark(b);
  auto& h = *b.harness;
  const auto& r = find_report(b, "fewshot");
  const auto& grid = b.config.protocol.k_grid;
  o.detail << "adaptms mean RMSE over k:";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto cur = r.cell("adaptms", "k=" + std::to_string(grid[i]));
    o.detail << " " << fmt(cur.rmse.mean);
    if (i == 0) continue;
    const auto prev = r.cell("adaptms", "k=" + std::to_string(grid[i - 1]));
    const double sds[] = {prev.rmse.sd, cur.rmse.sd};
    o.require(cur.rmse.mean <= prev.rmse.mean + eval::pooled_sd(sds),
              "non-increasing within one pooled sd at k=" + std::to_string(grid[i]));
  }
  const eval::Transfer& t = b.config.protocol.main;
  bool bit_equal = true;
  for (std::uint64_t seed : b.config.protocol.seeds) {
    const auto init = eval::variant_params(h, Variant::source_only, t, seed);
    const auto k0 = eval::adapted_params(h, Variant::finetune_all, t, 0, seed);
    bit_equal = bit_equal && model::params_fingerprint(init) == model::params_fingerprint(k0);
  }
  o.require(bit_equal, "finetune_all k=0 bit-equals its initialization");

  const std::uint64_t seed = b.config.protocol.seeds.front();
  const model::ModelParams start = eval::variant_params(h, Variant::adaptms, t, seed);
  model::ModelParams fitted = start;
  const auto rows = h.fewshot_rows(t.target, 200, seed);
  calib::fit_supervised_fewshot(fitted, h.data().batch(rows), b.config.fewshot);
  const std::string pair = model::calib_block_name(t.target);
  auto other = [&](std::string_view n) { return n != pair && !n.starts_with("gate."); };
  bool only_allowed = model::params_fingerprint(fitted, other) == model::params_fingerprint(start, other);
  bool pair_changed = fitted.calib.at(t.target) != start.calib.at(t.target);
  o.require(only_allowed, "few-shot leaves every non-calibration, non-gate block untouched");
  o.require(pair_changed, "few-shot moves the target pair");
  o.detail << "; finetune_all k=0 fingerprint " << (bit_equal ? "equal" : "different") << " to source_only on all seeds"
           << "; few-shot (k=200) other-block fingerprint " << (only_allowed ? "unchanged" : "changed");
}

// ---------------------------------------------------------------- 6

void lambda_sweep(const Benchmark& b, Outcome& o) {
  require_benchmark(b);
  const auto& r = find_report(b, "lambda_sweep");
  const std::vector<std::string> expected{"lambda=0.0", "lambda=0.1", "lambda=0.5", "lambda=1.0"};
  o.require(r.settings() == expected, "columns are exactly the grid");
  const double l0 = r.cell("adaptms", "lambda=0.0").rmse.mean;
  const double l5 = r.cell("adaptms", "lambda=0.5").rmse.mean;
  o.require(l5 < l0, "lambda=0.5 below lambda=0");
  o.detail << "columns";
  for (const auto& s : r.settings()) o.detail << " " << s;
  o.detail << "; mean RMSE";
  for (const auto& s : r.settings()) o.detail << " " << fmt(r.cell("adaptms", s).rmse.mean);
}

// ---------------------------------------------------------------- 7

void relative_gain_metric(Outcome& o) {
  const double g1 = eval::relative_gain(0.70, 0.66);
  const double g2 = eval::relative_gain(0.76, 0.66);
  o.require(std::round(g1 * 1000) == 57, "relative_gain(0.70, 0.66) = 0.057");
  o.require(std::round(g2 * 1000) == 132, "relative_gain(0.76, 0.66) = 0.132");
  o.detail << "relative_gain(0.70, 0.66) = " << fmt(g1) << ", relative_gain(0.76, 0.66) = " << fmt(g2);
}

// ---------------------------------------------------------------- 8

void hygiene_and_determinism(const Benchmark& b, Outcome& o) {
  require_benchmark(b);
  auto& h = *b.harness;
  namespace fs = std::filesystem;
  // Protocol hygiene over every fitting set any protocol used.
  std::vector<data::InstanceId> test_ids;
  for (std::size_t p = 0; p < b.config.generate.specs.size(); ++p) {
    const auto ids = h.data().ids(h.data().indices(static_cast<int>(p), eval::Part::test));
    test_ids.insert(test_ids.end(), ids.begin(), ids.end());
  }
  const auto leaks = h.fit_log().overlapping(test_ids);
  o.require(leaks.empty(), "no test id in any fitting set");
  const auto target_train = h.data().ids(h.data().indices(b.config.protocol.main.target, eval::Part::train));
  const std::set<data::InstanceId> train_set(target_train.begin(), target_train.end());
  std::size_t fewshot_sets = 0;
  for (const auto& e : h.fit_log().entries()) {
    if (!e.label.starts_with("fewshot[")) continue;
    ++fewshot_sets;
    for (auto id : e.ids) {
      if (!train_set.count(id)) {
        o.require(false, "few-shot sample outside the target training split");
        break;
      }
    }
  }

  // Corpus: regeneration and file round trip.
  const auto& g = b.config.generate;
  data::Corpus again = data::generate_corpus(g.specs, g.n_per_platform, g.seed);
  again.config_fingerprint = b.config.fingerprint();
  const std::string text = data::serialize_corpus(b.raw);
  o.require(data::serialize_corpus(again) == text, "regenerated corpus byte-identical");
  const fs::path dir = fs::temp_directory_path() / "adaptms_acceptance";
  fs::create_directories(dir);
  data::write_corpus(b.raw, dir / "corpus.tsv");
  o.require(data::serialize_corpus(data::read_corpus(dir / "corpus.tsv")) == text, "corpus file round trip");

  // Snapshot: retraining reproduces the model bit for bit; the file round-trips.
  const eval::Recipe recipe = h.recipe(b.config.protocol.main, b.config.train.lambda, b.config.protocol.seeds.front());
  const auto& cached = h.model(recipe).params;
  const auto retrained = eval::train_model(*b.data, recipe);
  o.require(model::params_fingerprint(retrained.params) == model::params_fingerprint(cached), "retrained model identical");
  const model::Snapshot snap{cached, b.config.fingerprint(), b.data->corpus_hash};
  model::write_snapshot(snap, dir / "model.snap");
  o.require(model::serialize_snapshot(model::read_snapshot(dir / "model.snap")) == model::serialize_snapshot(snap),
            "snapshot file round trip");

  // Reports: the full protocol suite re-run end to end on a reduced config, through
  // the CLI, in two separate output directories.
  const eval::RunConfig small = testing::small_config();
  std::string cfg_path = (dir / "small.json").string();
  { std::ofstream(cfg_path) << eval::to_json(small).dump(2); }
  bool reports_equal = true;
  for (const char* out : {"run1", "run2"}) {
    const std::string d = (dir / out).string();
    for (const char* cmd : {"generate", "evaluate", "sweep", "ablate"}) {
      const char* argv[] = {"adaptms", cmd, "--config", cfg_path.c_str(), "--out", d.c_str(), "--quiet"};
      std::ostringstream sink_out, sink_err;
      if (cli::run(7, argv, sink_out, sink_err) != 0) throw std::runtime_error(std::string("cli ") + cmd + ": " + sink_err.str());
    }
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "run1")) {
    if (entry.path().extension() == ".bin") continue;  // embedding cache
    std::ifstream a(entry.path(), std::ios::binary), c(dir / "run2" / entry.path().filename(), std::ios::binary);
    const std::string sa{std::istreambuf_iterator<char>(a), {}}, sc{std::istreambuf_iterator<char>(c), {}};
    reports_equal = reports_equal && sa == sc;
    ++files;
  }
  o.require(reports_equal, "re-run outputs byte-identical");
  fs::remove_all(dir);

  o.detail << "test-id overlap with " << h.fit_log().entries().size() << " fitting sets: " << leaks.size()
           << "; few-shot sets inside target train: " << fewshot_sets << "; corpus regen and round trip identical;"
           << " retrained model and snapshot round trip identical; " << files << " small-config outputs identical on re-run";
}

// ---------------------------------------------------------------- 9

void budget(const Benchmark& b, Outcome& o) {
  require_benchmark(b);
  o.require(b.total_seconds < 900.0, "under 15 minutes");
  o.detail << "generate + embed + all five protocols over " << b.config.protocol.seeds.size() << " seeds: "
           << fmt(b.total_seconds, 4) << " s (" << b.harness->models_trained() << " models); hyperparameter search not included";
}

}  // namespace

int main() {
  cli::tune_allocator();
  run_guarded(1, "gradient suite", gradient_suite);
  run_guarded(2, "calibration exactness", calibration_exactness);

  const Benchmark bench = run_benchmark();
  run_guarded(3, "adversarial alignment effect", [&](Outcome& o) { alignment_effect(bench, o); });
  run_guarded(4, "unsupervised ordering", [&](Outcome& o) { unsupervised_ordering(bench, o); });
  run_guarded(5, "few-shot adaptation", [&](Outcome& o) { fewshot_adaptation(bench, o); });
  run_guarded(6, "lambda sweep", [&](Outcome& o) { lambda_sweep(bench, o); });
  run_guarded(7, "relative gain", relative_gain_metric);
  run_guarded(8, "hygiene and determinism", [&](Outcome& o) { hygiene_and_determinism(bench, o); });
  run_guarded(9, "budget", [&](Outcome& o) { budget(bench, o); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
