#pragma once

#include "adaptms/data/split.hpp"
#include "adaptms/model/network.hpp"
#include "adaptms/model/train.hpp"

#include <cstdint>

namespace adaptms::calib {

struct FewShotConfig {
  double lr = 1e-3;
  std::size_t max_steps = 200;
  /// Steps without held-out improvement before stopping (k >= kEarlyStopMinK only).
  std::size_t patience = 20;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Early stopping on a held-out quarter starts at this sample size.
inline constexpr std::size_t kEarlyStopMinK = 20;

struct FewShotResult {
  std::size_t fit_size = 0;
  std::size_t holdout_size = 0;
  std::size_t steps = 0;       ///< optimizer steps taken
  std::size_t best_step = 0;   ///< 0 means the starting point was kept
  double mse_before = 0.0;     ///< on all k samples
  double mse_after = 0.0;
};

/// Supervised target adaptation of (a_T, b_T) and the gate (w_g, b_g) only. The pair is
/// warm-started by least squares on the fitting rows, then refined jointly with the gate
/// by Adam on the calibrated MSE. All rows of `sample` must belong to one platform.
/// Throws std::invalid_argument for an empty sample.
FewShotResult fit_supervised_fewshot(model::ModelParams& params, const model::Batch& sample,
                                     const FewShotConfig& config);

/// Fine-tuning of every parameter except the discriminator and the other platforms'
/// calibration pairs, with the training step of the source phase at lambda = 0. An empty
/// sample leaves `params` untouched. Full-batch steps when k is below the batch size.
FewShotResult finetune_all(model::ModelParams& params, const model::Batch& sample,
                           const model::TrainConfig& train, const FewShotConfig& config,
                           const data::ImputationTable& fill);

}  // namespace adaptms::calib
