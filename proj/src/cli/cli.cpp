#include "adaptms/cli/cli.hpp"

#include "adaptms/data/corpus_io.hpp"
#include "adaptms/data/generate.hpp"
#include "adaptms/data/split.hpp"
#include "adaptms/eval/benchmark.hpp"
#include "adaptms/eval/protocols.hpp"
#include "adaptms/eval/search.hpp"
#include "adaptms/model/snapshot.hpp"
#include "adaptms/util/float_io.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

namespace adaptms::cli {

namespace fs = std::filesystem;
using eval::RunConfig;

void tune_allocator() {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
};

class Session {
 public:
  Session(const Options& opt, std::ostream& out, std::ostream& err) : opt_(opt), out_(out), err_(err) {
    config_ = opt.config_path.empty() ? RunConfig::defaults() : eval::load_run_config(opt.config_path);
    if (opt.seed) {
      config_.train.seed = *opt.seed;
      config_.protocol.seeds = {*opt.seed};
    }
    if (!opt.out_dir.empty()) config_.io.out_dir = opt.out_dir;
    config_.validate();
    fingerprint_ = config_.fingerprint();
  }

  const RunConfig& config() const { return config_; }
  const std::string& fingerprint() const { return fingerprint_; }

  fs::path path(const std::string& p) const {
    const fs::path q(p);
    return q.is_absolute() ? q : fs::path(config_.io.out_dir) / q;
  }

  void info(const std::string& msg) const {
    if (!opt_.quiet) err_ << msg << '\n';
  }
  std::ostream& out() const { return out_; }

  void write(const fs::path& p, const std::string& content) const {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed: " + p.string());
    info("wrote " + p.string());
  }

  data::Corpus generate() const {
    const auto& g = config_.generate;
    data::Corpus corpus = data::generate_corpus(g.specs, g.n_per_platform, g.seed);
    corpus.config_fingerprint = fingerprint_;
    return corpus;
  }

  data::Corpus load_corpus() const {
    const fs::path p = path(config_.io.corpus);
    if (!fs::exists(p)) throw std::runtime_error("corpus file not found: " + p.string() + " (run generate first)");
    data::Corpus corpus = data::read_corpus(p);
    if (corpus.config_fingerprint != fingerprint_) {
      throw std::runtime_error("corpus " + p.string() + " was generated under config " + corpus.config_fingerprint +
                               ", current config is " + fingerprint_);
    }
    return corpus;
  }

  eval::BenchmarkData prepare() const {
    const data::Corpus raw = load_corpus();
    eval::BenchmarkData d = eval::BenchmarkData::prepare(raw, config_.embed, path(config_.io.embeddings));
    for (const auto& w : d.warnings) info("warning: " + w);
    return d;
  }

  void emit(const eval::EvalReport& report) const {
    write(path(report.name + ".csv"), eval::to_csv(report));
    write(path(report.name + ".json"), eval::to_json(report));
    if (!opt_.quiet) out_ << report.name << '\n' << eval::format_table(report) << '\n';
  }

  // Every target test id must be absent from every fitting set.
  void check_hygiene(const eval::Harness& h) const {
    const auto& data = h.data();
    std::vector<data::InstanceId> test_ids;
    for (std::size_t p = 0; p < data.corpus.num_platforms(); ++p) {
      const auto ids = data.ids(data.indices(static_cast<int>(p), eval::Part::test));
      test_ids.insert(test_ids.end(), ids.begin(), ids.end());
    }
    const auto hits = h.fit_log().overlapping(test_ids);
    if (!hits.empty()) throw std::logic_error("test instances leaked into fitting set " + hits.front());
  }

 private:
  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  RunConfig config_;
  std::string fingerprint_;
};

void cmd_generate(const Session& s) {
  const data::Corpus corpus = s.generate();
  s.write(s.path(s.config().io.corpus), data::serialize_corpus(corpus));
  s.out() << data::format_diagnostics(data::shift_diagnostics(corpus));
  s.out() << "config_fingerprint " << s.fingerprint() << "\ncorpus_hash " << corpus.content_hash() << '\n';
}

void cmd_train(const Session& s) {
  const eval::BenchmarkData data = s.prepare();
  eval::Harness h(data, s.config());
  const auto& cfg = s.config();
  const eval::Recipe recipe = h.recipe(cfg.protocol.main, cfg.train.lambda, cfg.train.seed);
  const auto t0 = std::chrono::steady_clock::now();
  const model::TrainResult& result = h.model(recipe);
  s.info("trained in " + util::format_double(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");

  model::Snapshot snap{h.moment_matched(result.params, cfg.protocol.main.target, cfg.train.seed), s.fingerprint(),
                       data.corpus_hash};
  s.write(s.path(cfg.io.snapshot), model::serialize_snapshot(snap));

  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : result.log) {
    epochs.push_back({{"epoch", e.epoch}, {"task_loss", e.task_loss}, {"domain_loss", e.domain_loss}, {"val_rmse", e.val_rmse}});
  }
  const nlohmann::json log{{"config_fingerprint", s.fingerprint()},
                           {"corpus_hash", data.corpus_hash},
                           {"transfer", eval::transfer_label(cfg.protocol.main, cfg.generate.specs)},
                           {"best_epoch", result.best_epoch},
                           {"steps", result.steps},
                           {"epochs", epochs},
                           {"test_rmse", h.score(snap.params, cfg.protocol.main.target).rmse}};
  s.write(s.path("train_log.json"), log.dump(2) + "\n");
  s.check_hygiene(h);
  for (const auto& w : h.take_warnings()) s.info("warning: " + w);
}

void cmd_evaluate(const Session& s) {
  const eval::BenchmarkData data = s.prepare();
  eval::Harness h(data, s.config());
  s.emit(eval::run_unsupervised_protocol(h));
  s.emit(eval::run_fewshot_protocol(h));
  s.emit(eval::run_pairwise(h));
  s.check_hygiene(h);
  s.info(std::to_string(h.models_trained()) + " models, " + util::format_double(h.training_seconds()) + " s training");
}

void cmd_sweep(const Session& s) {
  const eval::BenchmarkData data = s.prepare();
  eval::Harness h(data, s.config());
  s.emit(eval::run_lambda_sweep(h));
  std::vector<eval::SearchResult> results;
  for (eval::Variant v : {eval::Variant::source_only, eval::Variant::pool_noadapt, eval::Variant::dann_only,
                          eval::Variant::adaptms}) {
    results.push_back(eval::hyperparameter_search(h, v));
    const auto& b = results.back().best;
    s.info("search " + eval::to_string(v) + ": lr=" + util::format_double(b.lr) + " dropout=" +
           util::format_double(b.dropout) + " fusion_hidden=" + std::to_string(b.fusion_hidden) +
           " lambda=" + util::format_double(b.lambda) + " val_rmse=" + util::format_double(b.val_rmse));
  }
  s.write(s.path("hyperparameter_search.csv"), eval::search_to_csv(results, s.fingerprint()));
  s.check_hygiene(h);
}

void cmd_ablate(const Session& s) {
  const eval::BenchmarkData data = s.prepare();
  eval::Harness h(data, s.config());
  s.emit(eval::run_ablation(h));
  s.check_hygiene(h);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-platform satisfaction prediction: synthetic benchmark, training and evaluation"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run config; defaults apply to missing keys");
    sub->add_option("--seed", opt.seed, "Override train.seed and run protocols with this single seed");
    sub->add_option("--out", opt.out_dir, "Output directory (overrides io.out_dir)");
    sub->add_flag("--quiet", opt.quiet, "Only print errors");
  };
  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const Session&);
  };
  const Command commands[] = {
      {"generate", "Generate the synthetic corpus and print shift diagnostics", cmd_generate},
      {"train", "Train the full model on the main transfer and write a snapshot", cmd_train},
      {"evaluate", "Unsupervised, few-shot and pairwise reports", cmd_evaluate},
      {"sweep", "Lambda sweep and hyperparameter search", cmd_sweep},
      {"ablate", "Ablation report", cmd_ablate},
  };
  const Command* chosen = nullptr;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    sub->callback([&chosen, &c] { chosen = &c; });
  }
  bool print_default = false;
  app.add_subcommand("print-default-config", "Print the default config as JSON")->callback([&] { print_default = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (print_default) {
      out << eval::to_json(RunConfig::defaults()).dump(2) << '\n';
      return kExitOk;
    }
    const Session session(opt, out, err);
    chosen->fn(session);
    return kExitOk;
  } catch (const eval::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace adaptms::cli
