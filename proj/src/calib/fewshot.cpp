#include "adaptms/calib/fewshot.hpp"

#include "adaptms/calib/calibration.hpp"
#include "adaptms/nn/adam.hpp"
#include "adaptms/nn/losses.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace adaptms::calib {

using model::Batch;
using model::ModelParams;
using nn::Matrix;

void FewShotConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("fewshot." + msg); };
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  if (max_steps == 0) fail("max_steps must be positive");
}

namespace {

int single_platform(const Batch& sample, const char* who) {
  if (sample.size() == 0) {
    throw std::invalid_argument(std::string(who) + ": k = 0; use fit_unsupervised for the zero-shot case");
  }
  if (!sample.labeled()) throw std::invalid_argument(std::string(who) + ": sample has no labels");
  const int p = sample.platform.front();
  for (int q : sample.platform) {
    if (q != p) throw std::invalid_argument(std::string(who) + ": sample mixes platforms");
  }
  return p;
}

struct Partition {
  Batch fit, holdout;
};

Partition partition(const Batch& sample, std::uint64_t seed) {
  if (sample.size() < kEarlyStopMinK) return {sample, Batch{}};
  std::vector<std::size_t> order(sample.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  util::Rng rng(util::derive_seed(seed, 0xf5));
  rng.shuffle(std::span(order));
  const std::size_t n_hold = sample.size() / 4;
  const std::span<const std::size_t> all(order);
  return {model::subset(sample, all.subspan(n_hold)), model::subset(sample, all.first(n_hold))};
}

double mse(const ModelParams& params, const Batch& batch) {
  return nn::mse_loss(model::predict(params, batch), batch.label).loss;
}

// Frozen encoder quantities; only alpha moves during calibration fitting.
struct FrozenFeatures {
  Matrix h, g;
  std::vector<double> modality;
};

FrozenFeatures freeze(ModelParams& params, const Batch& batch) {
  model::EncoderCache cache;
  model::encode(params, batch, nn::Mode::eval, &cache);
  return {std::move(cache.h), std::move(cache.g), std::move(cache.modality)};
}

std::vector<double> gate_alpha(const ModelParams& params, const FrozenFeatures& f) {
  if (!params.options.gate_enabled) return std::vector<double>(f.h.rows(), 1.0);
  return model::gate(params, f.h, f.modality);
}

double frozen_mse(const ModelParams& params, const FrozenFeatures& f, std::span<const double> labels,
                  int platform) {
  const auto s = model::head_forward(params, model::fuse(f.h, f.g, gate_alpha(params, f)), 0.0, nullptr);
  return nn::mse_loss(apply_calibration(params.calib, s, platform), labels).loss;
}

// theta = [a, b, w_g..., b_g]; the gate part is absent when the gate is disabled.
std::vector<double> pack(const ModelParams& params, int platform) {
  std::vector<double> theta{params.calib.scale(platform), params.calib.bias(platform)};
  if (params.options.gate_enabled) {
    theta.insert(theta.end(), params.gate_weight.begin(), params.gate_weight.end());
    theta.push_back(params.gate_bias[0]);
  }
  return theta;
}

void unpack(ModelParams& params, int platform, std::span<const double> theta) {
  params.calib.set(platform, theta[0], theta[1]);
  if (params.options.gate_enabled) {
    std::copy(theta.begin() + 2, theta.end() - 1, params.gate_weight.begin());
    params.gate_bias[0] = theta.back();
  }
}

std::vector<double> frozen_gradient(const ModelParams& params, const FrozenFeatures& f,
                                    std::span<const double> labels, int platform) {
  const std::vector<double> alpha = gate_alpha(params, f);
  model::HeadCache hc;
  const auto s = model::head_forward(params, model::fuse(f.h, f.g, alpha), 0.0, nullptr, &hc);
  const double a = params.calib.scale(platform);
  const auto y_hat = apply_calibration(params.calib, s, platform);
  const auto loss = nn::mse_loss(y_hat, labels);

  std::vector<double> grad(params.options.gate_enabled ? 2 + params.gate_weight.size() + 1 : 2, 0.0);
  Matrix ds(s.size(), 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    grad[0] += loss.grad[i] * s[i];
    grad[1] += loss.grad[i];
    ds(i, 0) = a * loss.grad[i];
  }
  if (!params.options.gate_enabled) return grad;

  auto out = nn::dense_backward(params.head_out, hc.out, ds);
  auto hidden = nn::dense_backward(params.head_hidden, hc.hidden, out.input_grad);
  const Matrix& dz = hidden.input_grad;
  const std::size_t p = f.h.cols();
  for (std::size_t r = 0; r < s.size(); ++r) {
    double dalpha = 0.0;
    for (std::size_t j = 0; j < f.g.cols(); ++j) dalpha += dz(r, p + j) * f.g(r, j);
    const double dpre = dalpha * alpha[r] * (1.0 - alpha[r]);
    for (std::size_t j = 0; j < p; ++j) grad[2 + j] += dpre * f.h(r, j);
    grad[2 + p] += dpre * f.modality[r];
    grad.back() += dpre;
  }
  return grad;
}

}  // namespace

FewShotResult fit_supervised_fewshot(ModelParams& params, const Batch& sample, const FewShotConfig& config) {
  config.validate();
  const int platform = single_platform(sample, "fit_supervised_fewshot");
  const Partition part = partition(sample, config.seed);
  const bool early_stop = part.holdout.size() > 0;

  FewShotResult result;
  result.fit_size = part.fit.size();
  result.holdout_size = part.holdout.size();
  result.mse_before = mse(params, sample);

  const FrozenFeatures fit = freeze(params, part.fit);
  const FrozenFeatures hold = early_stop ? freeze(params, part.holdout) : FrozenFeatures{};
  auto score = [&](const ModelParams& p) {
    return early_stop ? frozen_mse(p, hold, part.holdout.label, platform)
                      : frozen_mse(p, fit, part.fit.label, platform);
  };

  std::vector<double> best = pack(params, platform);
  double best_score = score(params);

  if (part.fit.size() >= 2) {
    const auto s = model::head_forward(params, model::fuse(fit.h, fit.g, gate_alpha(params, fit)), 0.0, nullptr);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    if (var > 0.0) {
      const AffineMap ls = fit_least_squares(s, part.fit.label);
      params.calib.set(platform, ls.scale, ls.bias);
      const double sc = score(params);
      if (sc <= best_score) {
        best_score = sc;
        best = pack(params, platform);
      }
    }
  }

  std::vector<double> theta = pack(params, platform);
  nn::AdamState adam(theta.size(), nn::AdamConfig{config.lr});
  std::size_t since_best = 0;
  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    const auto grad = frozen_gradient(params, fit, part.fit.label, platform);
    nn::adam_step(theta, grad, adam);
    unpack(params, platform, theta);
    result.steps = step;
    const double sc = score(params);
    if (sc < best_score) {
      best_score = sc;
      best = theta;
      result.best_step = step;
      since_best = 0;
    } else if (early_stop && ++since_best > config.patience) {
      break;
    }
  }
  unpack(params, platform, best);
  result.mse_after = mse(params, sample);
  return result;
}

FewShotResult finetune_all(ModelParams& params, const Batch& sample, const model::TrainConfig& train,
                           const FewShotConfig& config, const data::ImputationTable& fill) {
  config.validate();
  train.validate();
  FewShotResult result;
  if (sample.size() == 0) return result;
  const int platform = single_platform(sample, "finetune_all");
  const Partition part = partition(sample, config.seed);
  const bool early_stop = part.holdout.size() > 0;
  result.fit_size = part.fit.size();
  result.holdout_size = part.holdout.size();
  result.mse_before = mse(params, sample);

  model::TrainConfig step_cfg = train;
  step_cfg.lambda = 0.0;
  const std::string own_pair = model::calib_block_name(platform);
  model::Optimizer optimizer(params, nn::AdamConfig{config.lr}, [&own_pair](std::string_view name) {
    const auto group = model::block_group(name);
    if (group == model::BlockGroup::discriminator) return false;
    if (group == model::BlockGroup::calibration) return name == own_pair;
    return true;
  });

  auto score = [&](const ModelParams& p) { return early_stop ? mse(p, part.holdout) : mse(p, part.fit); };
  ModelParams best = params;
  double best_score = score(params);

  util::Rng rng(util::derive_seed(config.seed, 0xf7));
  const std::size_t batch = std::min(train.batch_size, part.fit.size());
  std::vector<std::size_t> order(part.fit.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();
  std::size_t since_best = 0;
  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    if (cursor + batch > order.size()) {
      rng.shuffle(std::span(order));
      cursor = 0;
    }
    const Batch mb = model::subset(part.fit, std::span<const std::size_t>(order).subspan(cursor, batch));
    cursor += batch;
    model::train_step(params, optimizer, mb, nullptr, step_cfg, fill, rng);
    result.steps = step;
    const double sc = score(params);
    if (sc < best_score) {
      best_score = sc;
      best = params;
      result.best_step = step;
      since_best = 0;
    } else if (early_stop && ++since_best > config.patience) {
      break;
    }
  }
  params = std::move(best);
  result.mse_after = mse(params, sample);
  return result;
}

}  // namespace adaptms::calib
