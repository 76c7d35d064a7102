#include "adaptms/eval/benchmark.hpp"

#include "adaptms/eval/metrics.hpp"
#include "adaptms/util/float_io.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace adaptms::eval {

BenchmarkData BenchmarkData::prepare(const data::Corpus& raw, const embed::EmbedderConfig& embed,
                                     const std::optional<std::filesystem::path>& cache) {
  BenchmarkData d;
  d.corpus_hash = raw.content_hash();
  d.split = data::time_split(raw);
  data::ImputationResult imputed = data::impute_missing(raw, d.split);
  d.corpus = std::move(imputed.corpus);
  d.fill = std::move(imputed.table);
  d.warnings = std::move(imputed.warnings);
  const embed::HashingEmbedder embedder(embed);
  if (cache) {
    embed::CachedEmbedding c = embed::embed_corpus_cached(raw, embedder, *cache);
    if (c.warning) d.warnings.push_back(*c.warning);
    d.embeddings = std::move(c.table);
  } else {
    d.embeddings = embed::embed_corpus(raw, embedder, embed.hash_seed);
  }
  return d;
}

std::vector<std::size_t> BenchmarkData::indices(std::span<const int> platforms, Part part) const {
  std::vector<std::size_t> out;
  for (int p : platforms) {
    const auto& s = split.platforms.at(static_cast<std::size_t>(p));
    const auto& rows = part == Part::train ? s.train : part == Part::val ? s.val : s.test;
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::vector<std::size_t> BenchmarkData::indices(int platform, Part part) const {
  const int one[] = {platform};
  return indices(one, part);
}

model::Batch BenchmarkData::batch(std::span<const std::size_t> rows, bool with_labels) const {
  return model::make_batch(corpus, embeddings, rows, with_labels);
}

std::vector<data::InstanceId> BenchmarkData::ids(std::span<const std::size_t> rows) const {
  std::vector<data::InstanceId> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(corpus.instances.at(r).id());
  return out;
}

void FitLog::record(std::string label, std::vector<data::InstanceId> ids) {
  entries_.push_back({std::move(label), std::move(ids)});
}

std::vector<std::string> FitLog::overlapping(std::span<const data::InstanceId> ids) const {
  const std::unordered_set<data::InstanceId> probe(ids.begin(), ids.end());
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (std::any_of(e.ids.begin(), e.ids.end(), [&](data::InstanceId id) { return probe.count(id) > 0; })) {
      out.push_back(e.label);
    }
  }
  return out;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<std::pair<std::string, std::string>> recipe_fields(const Recipe& r) {
  auto d = [](double v) { return util::format_double(v); };
  auto u = [](std::size_t v) { return std::to_string(v); };
  return {
      {"transfer.sources", join_ints(r.transfer.sources)},
      {"transfer.target", std::to_string(r.transfer.target)},
      {"train.lambda", d(r.train.lambda)},
      {"train.p_mod", d(r.train.p_mod)},
      {"train.lr", d(r.train.lr)},
      {"train.dropout_rate", d(r.train.dropout_rate)},
      {"train.disc_lr_scale", d(r.train.disc_lr_scale)},
      {"train.adam_beta1", d(r.train.adam_beta1)},
      {"train.batch_size", u(r.train.batch_size)},
      {"train.max_epochs", u(r.train.max_epochs)},
      {"train.patience", u(r.train.patience)},
      {"train.seed", std::to_string(r.train.seed)},
      {"dims.text_dim", u(r.dims.text_dim)},
      {"dims.proj_dim", u(r.dims.proj_dim)},
      {"dims.behavior_hidden", u(r.dims.behavior_hidden)},
      {"dims.fusion_hidden", u(r.dims.fusion_hidden)},
      {"dims.disc_hidden", u(r.dims.disc_hidden)},
      {"dims.num_platforms", u(r.dims.num_platforms)},
      {"options.gate_enabled", r.options.gate_enabled ? "1" : "0"},
      {"options.behavior_enabled", r.options.behavior_enabled ? "1" : "0"},
  };
}

}  // namespace

std::string Recipe::key() const {
  std::string out;
  for (const auto& [name, value] : recipe_fields(*this)) out += name + '=' + value + ';';
  return out;
}

std::vector<std::string> Recipe::diff(const Recipe& a, const Recipe& b) {
  const auto fa = recipe_fields(a);
  const auto fb = recipe_fields(b);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i].second != fb[i].second) out.push_back(fa[i].first);
  }
  return out;
}

model::TrainResult train_model(const BenchmarkData& data, const Recipe& recipe, FitLog* log) {
  model::TrainingData td;
  td.corpus = &data.corpus;
  td.embeddings = &data.embeddings;
  td.fill = &data.fill;
  td.source_train = data.indices(recipe.transfer.sources, Part::train);
  td.source_val = data.indices(recipe.transfer.sources, Part::val);
  td.target_unlabeled = data.indices(recipe.transfer.target, Part::train);
  if (log) {
    const std::string key = recipe.key();
    log->record("train[" + key + "].source_train", data.ids(td.source_train));
    log->record("train[" + key + "].source_val", data.ids(td.source_val));
    log->record("train[" + key + "].target_unlabeled", data.ids(td.target_unlabeled));
  }
  model::ModelParams init = model::ModelParams::init(recipe.dims, recipe.options, recipe.train.seed);
  double label_sum = 0.0;
  for (std::size_t r : td.source_train) label_sum += data.corpus.instances[r].label;
  init.head_out.bias[0] = label_sum / static_cast<double>(td.source_train.size());
  return model::train(std::move(init), td, recipe.train);
}

Harness::Harness(const BenchmarkData& data, RunConfig config) : data_(data), config_(std::move(config)) {
  config_.validate();
  if (data_.corpus.num_platforms() != config_.generate.specs.size()) {
    throw std::invalid_argument("harness: corpus has " + std::to_string(data_.corpus.num_platforms()) +
                                " platforms, config expects " + std::to_string(config_.generate.specs.size()));
  }
  for (std::size_t p = 0; p < data_.corpus.num_platforms(); ++p) {
    test_batches_.push_back(data_.batch(data_.indices(static_cast<int>(p), Part::test)));
  }
  std::vector<int> all(data_.corpus.num_platforms());
  std::iota(all.begin(), all.end(), 0);
  all_test_ = data_.batch(data_.indices(all, Part::test));
}

Recipe Harness::recipe(const Transfer& transfer, double lambda, std::uint64_t seed) const {
  Recipe r;
  r.transfer = transfer;
  r.train = config_.train;
  r.train.lambda = lambda;
  r.train.seed = seed;
  r.dims = config_.model;
  return r;
}

const model::TrainResult& Harness::model(const Recipe& recipe) {
  const std::string key = recipe.key();
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;
  const auto t0 = std::chrono::steady_clock::now();
  auto result = std::make_unique<model::TrainResult>(train_model(data_, recipe, &log_));
  train_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return *cache_.emplace(key, std::move(result)).first->second;
}

calib::TargetRatingStats Harness::target_stats(int target, std::uint64_t seed, const model::ModelParams* params) {
  std::vector<std::size_t> rows = data_.indices(target, Part::train);
  std::string label = "stats[target=" + std::to_string(target);
  if (config_.protocol.stats_mode == StatsMode::audited) {
    util::Rng rng(util::derive_seed(seed, 0xa0d1));
    rng.shuffle(std::span(rows));
    rows.resize(config_.protocol.audit_size);
    std::sort(rows.begin(), rows.end());
    label += ",audit,seed=" + std::to_string(seed);
  }
  log_.record(label + "]", data_.ids(rows));
  std::vector<double> ratings;
  ratings.reserve(rows.size());
  for (std::size_t r : rows) ratings.push_back(data_.corpus.instances[r].label);
  if (params) {
    const auto s = model::predict_latent(*params, data_.batch(rows, false));
    const double rho = calib::correlation(s, ratings);
    if (rho < 0.0) {
      warnings_.push_back("target " + std::to_string(target) + ", seed " + std::to_string(seed) +
                          ": model scores correlate negatively (" + util::format_double(rho) +
                          ") with the audited target ratings; moment matching keeps a > 0");
    }
  }
  return calib::TargetRatingStats::from_ratings(ratings);
}

model::ModelParams Harness::moment_matched(const model::ModelParams& params, int target, std::uint64_t seed) {
  const calib::TargetRatingStats stats = target_stats(target, seed, &params);
  const auto rows = data_.indices(target, Part::train);
  log_.record("calib_unlabeled[target=" + std::to_string(target) + "]", data_.ids(rows));
  const auto s = model::predict_latent(params, data_.batch(rows, false));
  const calib::AffineMap map = calib::fit_unsupervised(s, stats);
  model::ModelParams out = params;
  out.calib.set(target, map.scale, map.bias);
  return out;
}

Scores Harness::score(const model::ModelParams& params, int target) const {
  const model::Batch& test = test_batches_.at(static_cast<std::size_t>(target));
  const auto pred = model::predict(params, test);
  return {rmse(pred, test.label), mae(pred, test.label)};
}

double Harness::disc_accuracy(const model::ModelParams& params) const {
  return model::discriminator_accuracy(params, all_test_);
}

std::vector<std::size_t> Harness::fewshot_rows(int target, std::size_t k, std::uint64_t seed) const {
  std::vector<std::size_t> rows = data_.indices(target, Part::train);
  if (k > rows.size()) {
    throw std::invalid_argument("fewshot: k=" + std::to_string(k) + " exceeds the target training split (" +
                                std::to_string(rows.size()) + ")");
  }
  util::Rng rng(util::derive_seed(seed, 0x4b));
  rng.shuffle(std::span(rows));
  rows.resize(k);
  return rows;
}

std::vector<std::string> Harness::take_warnings() {
  std::vector<std::string> out = std::move(warnings_);
  warnings_.clear();
  return out;
}

}  // namespace adaptms::eval
