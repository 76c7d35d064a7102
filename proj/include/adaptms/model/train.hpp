#pragma once

#include "adaptms/model/network.hpp"
#include "adaptms/nn/adam.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace adaptms::model {

struct TrainConfig {
  double lambda = 0.5;
  double p_mod = 0.3;
  double lr = 3e-4;
  double dropout_rate = 0.1;
  /// Discriminator learning rate as a multiple of lr.
  double disc_lr_scale = 10.0;
  /// Adam first-moment decay for every block.
  double adam_beta1 = 0.5;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 15;
  /// Epochs without validation improvement before stopping.
  std::size_t patience = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Adam over the blocks accepted by the filter; other blocks are never touched.
class Optimizer {
 public:
  using BlockFilter = std::function<bool(std::string_view)>;

  Optimizer(const ModelParams& params, nn::AdamConfig config, BlockFilter trainable);

  void step(ModelParams& params, const ModelParams& grads);
  std::uint64_t step_count() const { return step_count_; }
  bool is_trainable(std::string_view block) const;
  /// Multiplies the learning rate of every block in `group`.
  void set_lr_scale(BlockGroup group, double scale);

 private:
  nn::AdamConfig config_;
  std::vector<nn::AdamConfig> block_config_;
  std::vector<BlockGroup> groups_;
  BlockFilter filter_;
  std::vector<std::vector<double>> first_, second_;
  std::vector<bool> active_;
  std::uint64_t step_count_ = 0;
};

/// Filter for the source-training phase: everything except calibration pairs of
/// platforms outside `labeled_platforms`.
Optimizer::BlockFilter source_training_filter(std::vector<int> labeled_platforms);

struct StepResult {
  Losses losses;
};

/// Modality dropout on both batches, gradient computation and one optimizer step.
StepResult train_step(ModelParams& params, Optimizer& optimizer, const Batch& labeled, const Batch* unlabeled,
                      const TrainConfig& config, const data::ImputationTable& fill, util::Rng& rng);

struct TrainingData {
  const data::Corpus* corpus = nullptr;  // imputed
  const embed::EmbeddingTable* embeddings = nullptr;
  const data::ImputationTable* fill = nullptr;
  std::vector<std::size_t> source_train;
  std::vector<std::size_t> source_val;
  std::vector<std::size_t> target_unlabeled;  // may be empty (no adaptation data)
};

struct EpochLog {
  std::size_t epoch = 0;  // 0 = before any update
  double task_loss = 0.0;
  double domain_loss = 0.0;
  double val_rmse = 0.0;
};

struct TrainResult {
  ModelParams params;  // snapshot with the best validation RMSE
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::uint64_t steps = 0;
};

/// Source-validation RMSE with each row's own calibration pair.
double validation_rmse(const ModelParams& params, const Batch& val);

/// Mini-batch training with early stopping on source-validation RMSE. Throws
/// std::runtime_error if a loss becomes non-finite.
TrainResult train(ModelParams init, const TrainingData& data, const TrainConfig& config);

}  // namespace adaptms::model
