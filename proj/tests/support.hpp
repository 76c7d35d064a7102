#pragma once

#include "adaptms/eval/run_config.hpp"
#include "adaptms/model/network.hpp"
#include "adaptms/model/params.hpp"
#include "adaptms/nn/gradcheck.hpp"
#include "adaptms/util/rng.hpp"

#include <vector>

namespace adaptms::testing {

inline model::ModelDims tiny_dims() {
  model::ModelDims d;
  d.text_dim = 10;
  d.proj_dim = 4;
  d.behavior_hidden = 5;
  d.fusion_hidden = 7;
  d.disc_hidden = 6;
  d.num_platforms = 3;
  return d;
}

/// Random model-ready rows; platforms cycle through `platforms`.
inline model::Batch random_batch(std::size_t n, const model::ModelDims& dims, std::vector<int> platforms,
                                 bool labeled, std::uint64_t seed) {
  util::Rng rng(seed);
  model::Batch b;
  b.text = nn::Matrix(n, dims.text_dim);
  b.behavior = nn::Matrix(n, data::kBehaviorDim);
  for (auto& v : b.text.values()) v = rng.normal(0.0, 0.5);
  for (auto& v : b.behavior.values()) v = rng.uniform(0.0, 10.0);
  for (std::size_t i = 0; i < n; ++i) {
    b.modality.push_back(rng.bernoulli(0.7) ? 1.0 : 0.0);
    b.platform.push_back(platforms[i % platforms.size()]);
    if (labeled) b.label.push_back(rng.uniform(1.0, 5.0));
    b.ids.push_back(i);
  }
  return b;
}

/// Parameters with every block moved off its initial value so that no gradient is
/// trivially zero (calibration pairs, batch-norm affine).
inline model::ModelParams perturbed_params(const model::ModelDims& dims, std::uint64_t seed,
                                           model::ModelOptions options = {}) {
  model::ModelParams p = model::ModelParams::init(dims, options, seed);
  util::Rng rng(util::derive_seed(seed, 99));
  for (auto& view : p.trainable()) {
    for (auto& v : view.values) v += rng.normal(0.0, 0.05);
  }
  return p;
}

/// perturbed_params with the output moved into the label range, as training initializes it.
/// Keeps the loss O(1) so finite-difference roundoff stays well below the checked gradients.
inline model::ModelParams gradcheck_params(const model::ModelDims& dims, std::uint64_t seed,
                                           model::ModelOptions options = {}) {
  model::ModelParams p = perturbed_params(dims, seed, options);
  p.head_out.bias[0] += 3.0;
  return p;
}

/// Central-difference check of every trainable block of the full adversarial step.
/// Discriminator blocks are compared with dL_dom, all others with dL_task - lambda dL_dom
/// (the objective gradient reversal makes the encoder descend).
inline nn::GradCheckReport model_gradcheck(model::ModelParams& params, const model::Batch& labeled,
                                           const model::Batch& unlabeled, double lambda, double dropout_rate,
                                           std::size_t max_entries = 0) {
  const model::ForwardSettings settings{lambda, dropout_rate, nn::Mode::train};
  const std::uint64_t dropout_seed = 4242;
  util::Rng rng(dropout_seed);
  const model::GradientResult gr = model::compute_gradients(params, labeled, &unlabeled, settings, &rng);
  auto losses = [&] {
    util::Rng r(dropout_seed);
    return model::compute_losses(params, labeled, &unlabeled, settings, &r);
  };
  auto views = params.trainable();
  const auto grads = gr.grads.trainable();
  std::vector<nn::GradBlock> disc, rest;
  for (std::size_t i = 0; i < views.size(); ++i) {
    nn::GradBlock b{views[i].name, views[i].values, grads[i].values};
    (model::block_group(views[i].name) == model::BlockGroup::discriminator ? disc : rest).push_back(b);
  }
  nn::GradCheckOptions opt;
  opt.max_entries_per_block = max_entries;
  // Gradients below 1e-4 (several are exactly zero, e.g. behind batch norm of a constant
  // input) are held to an absolute error of 1e-4 times the relative tolerance.
  opt.magnitude_floor = 1e-4;
  opt.richardson = true;
  nn::GradCheckReport report = nn::finite_diff_check([&] { const auto l = losses(); return l.task - lambda * l.domain; },
                                                     rest, opt);
  const nn::GradCheckReport d = nn::finite_diff_check([&] { return losses().domain; }, disc, opt);
  report.blocks.insert(report.blocks.end(), d.blocks.begin(), d.blocks.end());
  return report;
}

/// A run config small enough for end-to-end tests in a few seconds.
inline eval::RunConfig small_config() {
  eval::RunConfig c = eval::RunConfig::defaults();
  c.generate.n_per_platform = 600;
  c.embed.dim = 64;
  c.model.text_dim = 64;
  c.model.proj_dim = 16;
  c.model.behavior_hidden = 16;
  c.model.fusion_hidden = 32;
  c.model.disc_hidden = 16;
  c.train.max_epochs = 2;
  c.train.batch_size = 64;
  c.protocol.seeds = {1};
  c.protocol.k_grid = {0, 20, 50};
  c.fewshot.max_steps = 20;
  c.search.budget = 2;
  c.search.max_epochs = 1;
  return c;
}

}  // namespace adaptms::testing
