#include "adaptms/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adaptms::model {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("train." + msg); };
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be a finite value >= 0");
  if (!(p_mod >= 0.0 && p_mod <= 1.0)) fail("p_mod must be in [0, 1]");
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must be in [0, 1)");
  if (!(disc_lr_scale > 0.0) || !std::isfinite(disc_lr_scale)) fail("disc_lr_scale must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam_beta1 must be in [0, 1)");
  if (batch_size < 2) fail("batch_size must be at least 2");
  if (max_epochs == 0) fail("max_epochs must be positive");
}

Optimizer::Optimizer(const ModelParams& params, nn::AdamConfig config, BlockFilter trainable)
    : config_(config), filter_(std::move(trainable)) {
  for (const auto& view : params.trainable()) {
    const bool on = !filter_ || filter_(view.name);
    active_.push_back(on);
    groups_.push_back(block_group(view.name));
    block_config_.push_back(config_);
    first_.emplace_back(on ? view.values.size() : 0, 0.0);
    second_.emplace_back(on ? view.values.size() : 0, 0.0);
  }
}

bool Optimizer::is_trainable(std::string_view block) const { return !filter_ || filter_(block); }

void Optimizer::set_lr_scale(BlockGroup group, double scale) {
  for (std::size_t k = 0; k < groups_.size(); ++k) {
    if (groups_[k] == group) block_config_[k].lr = config_.lr * scale;
  }
}

void Optimizer::step(ModelParams& params, const ModelParams& grads) {
  auto views = params.trainable();
  const auto grad_views = grads.trainable();
  if (views.size() != active_.size() || grad_views.size() != views.size()) {
    throw std::invalid_argument("optimizer: parameter layout changed");
  }
  ++step_count_;
  for (std::size_t k = 0; k < views.size(); ++k) {
    if (!active_[k]) continue;
    if (views[k].values.size() != grad_views[k].values.size()) {
      throw nn::ShapeError("optimizer: gradient block " + grad_views[k].name + " has the wrong size");
    }
    nn::adam_update_block(views[k].values, grad_views[k].values, first_[k], second_[k], step_count_, block_config_[k]);
  }
}

Optimizer::BlockFilter source_training_filter(std::vector<int> labeled_platforms) {
  return [platforms = std::move(labeled_platforms)](std::string_view name) {
    if (block_group(name) != BlockGroup::calibration) return true;
    for (int p : platforms) {
      if (name == calib_block_name(p)) return true;
    }
    return false;
  };
}

StepResult train_step(ModelParams& params, Optimizer& optimizer, const Batch& labeled, const Batch* unlabeled,
                      const TrainConfig& config, const data::ImputationTable& fill, util::Rng& rng) {
  const Batch src = modality_dropout(labeled, config.p_mod, rng, fill);
  Batch tgt;
  if (unlabeled && unlabeled->size() > 0) tgt = modality_dropout(*unlabeled, config.p_mod, rng, fill);
  const ForwardSettings settings{config.lambda, config.dropout_rate, nn::Mode::train};
  GradientResult g = compute_gradients(params, src, tgt.size() > 0 ? &tgt : nullptr, settings, &rng);
  if (!std::isfinite(g.losses.task) || !std::isfinite(g.losses.domain)) {
    throw std::runtime_error("training diverged: non-finite loss (task " + std::to_string(g.losses.task) +
                             ", domain " + std::to_string(g.losses.domain) + ")");
  }
  optimizer.step(params, g.grads);
  return {g.losses};
}

double validation_rmse(const ModelParams& params, const Batch& val) {
  if (val.size() == 0 || !val.labeled()) throw std::invalid_argument("validation_rmse: need labeled rows");
  const std::vector<double> pred = predict(params, val);
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - val.label[i]) * (pred[i] - val.label[i]);
  return std::sqrt(ss / static_cast<double>(pred.size()));
}

TrainResult train(ModelParams init, const TrainingData& data, const TrainConfig& config) {
  config.validate();
  if (!data.corpus || !data.embeddings || !data.fill) throw std::invalid_argument("train: incomplete data");
  if (data.source_train.size() < 2) throw std::invalid_argument("train: need at least 2 source instances");
  if (data.source_val.empty()) throw std::invalid_argument("train: empty source validation split");

  std::vector<int> labeled_platforms;
  for (std::size_t idx : data.source_train) {
    const int p = data.corpus->instances.at(idx).platform;
    if (std::ranges::find(labeled_platforms, p) == labeled_platforms.end()) labeled_platforms.push_back(p);
  }

  const Batch val = make_batch(*data.corpus, *data.embeddings, data.source_val);
  ModelParams params = std::move(init);
  Optimizer optimizer(params, nn::AdamConfig{config.lr, config.adam_beta1}, source_training_filter(labeled_platforms));
  optimizer.set_lr_scale(BlockGroup::discriminator, config.disc_lr_scale);

  util::Rng order_rng(util::derive_seed(config.seed, 0x5041));
  util::Rng target_rng(util::derive_seed(config.seed, 0x7a67));
  util::Rng noise_rng(util::derive_seed(config.seed, 0xd809));

  TrainResult result;
  result.params = params;
  const double initial = validation_rmse(params, val);
  result.log.push_back({0, 0.0, 0.0, initial});
  double best = initial;
  std::size_t since_best = 0;

  std::vector<std::size_t> order = data.source_train;
  std::vector<std::size_t> target_order = data.target_unlabeled;
  std::size_t target_pos = target_order.size();
  const std::size_t target_batch = std::min(config.batch_size, target_order.size());

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    order_rng.shuffle(std::span(order));
    double task_sum = 0.0, dom_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      if (end - begin < 2 && target_batch == 0) break;
      const auto rows = std::span(order).subspan(begin, end - begin);
      const Batch labeled = make_batch(*data.corpus, *data.embeddings, rows);
      Batch unlabeled;
      if (target_batch > 0) {
        if (target_pos + target_batch > target_order.size()) {
          target_rng.shuffle(std::span(target_order));
          target_pos = 0;
        }
        unlabeled = make_batch(*data.corpus, *data.embeddings,
                               std::span(target_order).subspan(target_pos, target_batch), false);
        target_pos += target_batch;
      }
      const StepResult step = train_step(params, optimizer, labeled, target_batch > 0 ? &unlabeled : nullptr,
                                         config, *data.fill, noise_rng);
      task_sum += step.losses.task;
      dom_sum += step.losses.domain;
      ++steps;
    }
    const double rmse = validation_rmse(params, val);
    if (!std::isfinite(rmse)) throw std::runtime_error("training diverged: non-finite validation RMSE");
    const double denom = static_cast<double>(std::max<std::size_t>(steps, 1));
    result.log.push_back({epoch, task_sum / denom, dom_sum / denom, rmse});
    if (rmse < best) {
      best = rmse;
      since_best = 0;
      result.params = params;
      result.best_epoch = epoch;
    } else {
      ++since_best;
    }
    if (since_best >= config.patience) break;
  }
  result.steps = optimizer.step_count();
  return result;
}

}  // namespace adaptms::model
