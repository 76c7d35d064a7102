#pragma once

#include "adaptms/calib/calibration.hpp"
#include "adaptms/data/split.hpp"
#include "adaptms/embed/embedding_table.hpp"
#include "adaptms/eval/run_config.hpp"
#include "adaptms/model/network.hpp"
#include "adaptms/model/train.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace adaptms::eval {

enum class Part { train, val, test };

/// Imputed corpus, splits and frozen embeddings shared by every protocol run.
struct BenchmarkData {
  data::Corpus corpus;  ///< after impute_missing
  data::CorpusSplit split;
  data::ImputationTable fill;
  embed::EmbeddingTable embeddings;
  std::string corpus_hash;  ///< git-style hash of the raw corpus file content
  std::vector<std::string> warnings;

  /// Splits and imputes `raw` and embeds its reviews. With a cache path, embeddings are
  /// read from (or written to) that file, keyed by corpus and embedder fingerprints.
  static BenchmarkData prepare(const data::Corpus& raw, const embed::EmbedderConfig& embed,
                               const std::optional<std::filesystem::path>& cache = std::nullopt);

  std::vector<std::size_t> indices(std::span<const int> platforms, Part part) const;
  std::vector<std::size_t> indices(int platform, Part part) const;
  model::Batch batch(std::span<const std::size_t> rows, bool with_labels = true) const;
  std::vector<data::InstanceId> ids(std::span<const std::size_t> rows) const;
};

/// Instance ids of every set used for fitting anything (weights, early stopping,
/// calibration statistics, few-shot samples), for hygiene audits.
class FitLog {
 public:
  struct Entry {
    std::string label;
    std::vector<data::InstanceId> ids;
  };
  void record(std::string label, std::vector<data::InstanceId> ids);
  const std::vector<Entry>& entries() const { return entries_; }
  /// Labels of entries sharing at least one id with `ids`.
  std::vector<std::string> overlapping(std::span<const data::InstanceId> ids) const;

 private:
  std::vector<Entry> entries_;
};

/// Everything that determines one trained model.
struct Recipe {
  Transfer transfer;
  model::TrainConfig train;
  model::ModelDims dims;
  model::ModelOptions options;

  /// Canonical text; two recipes train identical models iff their keys are equal.
  std::string key() const;
  /// Names of the fields in which two recipes differ ("train.lambda", ...).
  static std::vector<std::string> diff(const Recipe& a, const Recipe& b);
};

/// Trains one model: sources' train split labeled, target train split unlabeled,
/// sources' validation split for early stopping. The output bias starts at the mean
/// source training label.
model::TrainResult train_model(const BenchmarkData& data, const Recipe& recipe, FitLog* log = nullptr);

struct Scores {
  double rmse = 0.0;
  double mae = 0.0;
};

/// Trains on demand and caches models by recipe key; supplies the shared calibration,
/// scoring and hygiene bookkeeping used by all protocols.
class Harness {
 public:
  Harness(const BenchmarkData& data, RunConfig config);

  const BenchmarkData& data() const { return data_; }
  const RunConfig& config() const { return config_; }
  FitLog& fit_log() { return log_; }
  const FitLog& fit_log() const { return log_; }

  /// Recipe from the run config with the given transfer, lambda and seed.
  Recipe recipe(const Transfer& transfer, double lambda, std::uint64_t seed) const;
  const model::TrainResult& model(const Recipe& recipe);
  std::size_t models_trained() const { return cache_.size(); }
  double training_seconds() const { return train_seconds_; }

  /// Historical target rating moments per the configured stats mode. Logs a warning
  /// when `latent` (model scores on the same rows) correlates negatively with them.
  calib::TargetRatingStats target_stats(int target, std::uint64_t seed, const model::ModelParams* params = nullptr);
  /// Copy of `params` with the target pair fit by moment matching on unlabeled target
  /// training rows.
  model::ModelParams moment_matched(const model::ModelParams& params, int target, std::uint64_t seed);

  /// RMSE and MAE of calibrated predictions on the target test split.
  Scores score(const model::ModelParams& params, int target) const;
  /// Discriminator accuracy on the union of every platform's test split.
  double disc_accuracy(const model::ModelParams& params) const;

  /// First k rows of a seed-specific permutation of the target training split
  /// (so the samples for increasing k are nested).
  std::vector<std::size_t> fewshot_rows(int target, std::size_t k, std::uint64_t seed) const;

  std::vector<std::string> take_warnings();

 private:
  const BenchmarkData& data_;
  RunConfig config_;
  FitLog log_;
  std::map<std::string, std::unique_ptr<model::TrainResult>> cache_;
  std::vector<model::Batch> test_batches_;  // per platform
  model::Batch all_test_;
  double train_seconds_ = 0.0;
  std::vector<std::string> warnings_;
};

}  // namespace adaptms::eval
