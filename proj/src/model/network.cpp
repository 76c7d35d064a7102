#include "adaptms/model/network.hpp"

#include "adaptms/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptms::model {

using nn::Matrix;

Batch make_batch(const data::Corpus& corpus, const embed::EmbeddingTable& embeddings,
                 std::span<const std::size_t> indices, bool with_labels) {
  if (embeddings.size() != corpus.instances.size()) {
    throw std::invalid_argument("make_batch: embedding table has " + std::to_string(embeddings.size()) +
                                " rows for " + std::to_string(corpus.instances.size()) + " instances");
  }
  const std::size_t n = indices.size();
  Batch b;
  b.text = Matrix(n, embeddings.dim());
  b.behavior = Matrix(n, data::kBehaviorDim);
  b.modality.resize(n);
  b.platform.resize(n);
  b.ids.resize(n);
  if (with_labels) b.label.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t idx = indices[r];
    const auto& inst = corpus.instances.at(idx);
    const auto src = embeddings.rows.row(idx);
    std::copy(src.begin(), src.end(), b.text.row(r).begin());
    for (std::size_t f = 0; f < data::kBehaviorDim; ++f) {
      if (std::isnan(inst.behavior[f])) {
        throw std::invalid_argument("make_batch: instance " + std::to_string(inst.id()) +
                                    " has a missing behavior value (impute first)");
      }
      b.behavior(r, f) = inst.behavior[f];
    }
    b.modality[r] = inst.modality;
    b.platform[r] = inst.platform;
    b.ids[r] = inst.id();
    if (with_labels) b.label[r] = inst.label;
  }
  return b;
}

Batch concat(const Batch& a, const Batch& b) {
  Batch out;
  out.text = nn::vconcat(a.text, b.text);
  out.behavior = nn::vconcat(a.behavior, b.behavior);
  auto join = [](auto x, const auto& y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
  };
  out.modality = join(a.modality, b.modality);
  out.platform = join(a.platform, b.platform);
  out.ids = join(a.ids, b.ids);
  if (a.labeled() && b.labeled()) out.label = join(a.label, b.label);
  return out;
}

Batch subset(const Batch& batch, std::span<const std::size_t> rows) {
  Batch out;
  out.text = Matrix(rows.size(), batch.text.cols());
  out.behavior = Matrix(rows.size(), batch.behavior.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    if (i >= batch.size()) throw std::out_of_range("subset: row index out of range");
    std::ranges::copy(batch.text.row(i), out.text.row(r).begin());
    std::ranges::copy(batch.behavior.row(i), out.behavior.row(r).begin());
    out.modality.push_back(batch.modality[i]);
    out.platform.push_back(batch.platform[i]);
    out.ids.push_back(batch.ids[i]);
    if (batch.labeled()) out.label.push_back(batch.label[i]);
  }
  return out;
}

Batch modality_dropout(const Batch& batch, double p_mod, util::Rng& rng,
                       const data::ImputationTable& fill, std::vector<bool>* dropped) {
  if (p_mod < 0.0 || p_mod > 1.0) throw std::invalid_argument("modality dropout rate must be in [0, 1]");
  Batch out = batch;
  if (dropped) dropped->assign(batch.size(), false);
  if (p_mod == 0.0) return out;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (!rng.bernoulli(p_mod)) continue;
    const auto& constants = fill.fill.at(static_cast<std::size_t>(batch.platform[r]));
    std::copy(constants.begin(), constants.end(), out.behavior.row(r).begin());
    out.modality[r] = 0.0;
    if (dropped) (*dropped)[r] = true;
  }
  return out;
}

Matrix behavior_embed(ModelParams& params, const Matrix& behavior, nn::Mode mode, BehaviorCache* cache) {
  if (behavior.cols() != data::kBehaviorDim) {
    throw nn::ShapeError("behavior_embed: expected n x 6 input, got " + behavior.shape_string());
  }
  Matrix x(behavior.rows(), behavior.cols());
  if (params.options.behavior_enabled) {
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = std::log1p(std::max(behavior.data()[i], 0.0));
  }
  BehaviorCache local;
  BehaviorCache& c = cache ? *cache : local;
  Matrix a = nn::dense_forward(params.behavior_in, x, cache ? &c.in : nullptr);
  a = nn::batchnorm_forward(params.behavior_bn1, a, mode, cache ? &c.bn1 : nullptr);
  a = nn::dense_forward(params.behavior_mid, a, cache ? &c.mid : nullptr);
  a = nn::batchnorm_forward(params.behavior_bn2, a, mode, cache ? &c.bn2 : nullptr);
  if (cache) c.transformed = x;
  return nn::dense_forward(params.behavior_out, a, cache ? &c.out : nullptr);
}

std::vector<double> gate(const ModelParams& params, const Matrix& h, std::span<const double> modality) {
  const std::size_t p = params.dims.proj_dim;
  if (h.cols() != p || modality.size() != h.rows()) {
    throw nn::ShapeError("gate: h is " + h.shape_string() + " with " + std::to_string(modality.size()) +
                         " modality flags");
  }
  std::vector<double> alpha(h.rows());
  for (std::size_t r = 0; r < h.rows(); ++r) {
    const auto row = h.row(r);
    double pre = params.gate_bias[0] + params.gate_weight[p] * modality[r];
    for (std::size_t j = 0; j < p; ++j) pre += params.gate_weight[j] * row[j];
    alpha[r] = nn::sigmoid(pre);
  }
  return alpha;
}

Matrix fuse(const Matrix& h, const Matrix& g, std::span<const double> alpha) {
  if (h.rows() != g.rows() || h.cols() != g.cols() || alpha.size() != h.rows()) {
    throw nn::ShapeError("fuse: h " + h.shape_string() + ", g " + g.shape_string());
  }
  const std::size_t p = h.cols();
  Matrix z(h.rows(), 2 * p);
  for (std::size_t r = 0; r < h.rows(); ++r) {
    auto out = z.row(r);
    const auto hr = h.row(r);
    const auto gr = g.row(r);
    for (std::size_t j = 0; j < p; ++j) {
      out[j] = hr[j];
      out[p + j] = alpha[r] * gr[j];
    }
  }
  return z;
}

EncoderOutput encode(ModelParams& params, const Batch& batch, nn::Mode mode, EncoderCache* cache) {
  if (batch.text.cols() != params.dims.text_dim) {
    throw nn::ShapeError("encode: text embeddings are " + batch.text.shape_string() + ", model expects " +
                         std::to_string(params.dims.text_dim) + " columns");
  }
  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  Matrix h = nn::dense_forward(params.text_proj, batch.text, cache ? &c.text : nullptr);
  Matrix g = behavior_embed(params, batch.behavior, mode, cache ? &c.behavior : nullptr);
  std::vector<double> modality = batch.modality;
  if (!params.options.behavior_enabled) std::ranges::fill(modality, 0.0);
  EncoderOutput out;
  out.alpha = params.options.gate_enabled ? gate(params, h, modality) : std::vector<double>(h.rows(), 1.0);
  out.z = fuse(h, g, out.alpha);
  if (cache) {
    c.h = std::move(h);
    c.g = std::move(g);
    c.modality = std::move(modality);
    c.alpha = out.alpha;
  }
  return out;
}

EncoderOutput encode(const ModelParams& params, const Batch& batch) {
  // Eval-mode batch norm only reads the running statistics.
  return encode(const_cast<ModelParams&>(params), batch, nn::Mode::eval, nullptr);
}

std::vector<double> head_forward(const ModelParams& params, const Matrix& z, double dropout_rate,
                                 util::Rng* dropout_rng, HeadCache* cache) {
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
  HeadCache local;
  HeadCache& c = cache ? *cache : local;
  Matrix hidden = nn::dense_forward(params.head_hidden, z, cache ? &c.hidden : nullptr);
  c.keep_scale.clear();
  if (dropout_rng && dropout_rate > 0.0) {
    const double keep = 1.0 - dropout_rate;
    c.keep_scale.resize(hidden.size());
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      c.keep_scale[i] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      hidden.data()[i] *= c.keep_scale[i];
    }
  }
  const Matrix s = nn::dense_forward(params.head_out, hidden, cache ? &c.out : nullptr);
  return {s.values().begin(), s.values().end()};
}

Matrix discriminate(const ModelParams& params, const Matrix& z, nn::DenseCache* hidden, nn::DenseCache* out) {
  return nn::dense_forward(params.disc_out, nn::dense_forward(params.disc_hidden, z, hidden), out);
}

namespace {

constexpr std::size_t kEvalChunk = 2048;

template <class Fn>
void for_each_chunk(const Batch& batch, Fn&& fn) {
  std::vector<std::size_t> rows;
  for (std::size_t begin = 0; begin < batch.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(batch.size(), begin + kEvalChunk);
    if (begin == 0 && end == batch.size()) {
      fn(batch, begin);
      return;
    }
    rows.resize(end - begin);
    for (std::size_t i = begin; i < end; ++i) rows[i - begin] = i;
    fn(subset(batch, rows), begin);
  }
}

void encoder_backward(const ModelParams& params, const EncoderCache& c, const Matrix& dz, ModelParams& grads) {
  const std::size_t p = params.dims.proj_dim;
  const std::size_t n = dz.rows();
  Matrix dh = nn::slice_cols(dz, 0, p);
  Matrix dg(n, p);
  for (std::size_t r = 0; r < n; ++r) {
    const auto dz_row = dz.row(r);
    const auto g_row = c.g.row(r);
    auto dg_row = dg.row(r);
    double dalpha = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      dg_row[j] = c.alpha[r] * dz_row[p + j];
      dalpha += dz_row[p + j] * g_row[j];
    }
    if (!params.options.gate_enabled) continue;
    const double dpre = dalpha * c.alpha[r] * (1.0 - c.alpha[r]);
    const auto h_row = c.h.row(r);
    auto dh_row = dh.row(r);
    for (std::size_t j = 0; j < p; ++j) {
      grads.gate_weight[j] += dpre * h_row[j];
      dh_row[j] += dpre * params.gate_weight[j];
    }
    grads.gate_weight[p] += dpre * c.modality[r];
    grads.gate_bias[0] += dpre;
  }

  auto store = [](nn::DenseLayer& dst, nn::DenseGrads&& g) {
    dst.weight = std::move(g.weight_grad);
    dst.bias = std::move(g.bias_grad);
  };
  store(grads.text_proj, nn::dense_backward(params.text_proj, c.text, dh, false));

  const BehaviorCache& b = c.behavior;
  auto out = nn::dense_backward(params.behavior_out, b.out, dg);
  Matrix up = std::move(out.input_grad);
  store(grads.behavior_out, std::move(out));
  auto bn2 = nn::batchnorm_backward(params.behavior_bn2, b.bn2, up);
  grads.behavior_bn2.gamma = std::move(bn2.gamma_grad);
  grads.behavior_bn2.beta = std::move(bn2.beta_grad);
  auto mid = nn::dense_backward(params.behavior_mid, b.mid, bn2.input_grad);
  up = std::move(mid.input_grad);
  store(grads.behavior_mid, std::move(mid));
  auto bn1 = nn::batchnorm_backward(params.behavior_bn1, b.bn1, up);
  grads.behavior_bn1.gamma = std::move(bn1.gamma_grad);
  grads.behavior_bn1.beta = std::move(bn1.beta_grad);
  store(grads.behavior_in, nn::dense_backward(params.behavior_in, b.in, bn1.input_grad, false));
}

struct Pass {
  Losses losses;
  std::vector<double> task_grad;  // dL/dy_hat per labeled row
};

void check_inputs(const ModelParams& params, const Batch& labeled, const Batch* unlabeled) {
  if (labeled.size() == 0) throw std::invalid_argument("compute_gradients: empty labeled batch");
  if (!labeled.labeled()) throw std::invalid_argument("compute_gradients: labeled batch has no labels");
  auto check_platforms = [&](const Batch& b) {
    for (int p : b.platform) {
      if (p < 0 || static_cast<std::size_t>(p) >= params.dims.num_platforms) {
        throw std::out_of_range("compute_gradients: platform id " + std::to_string(p) + " out of range");
      }
    }
  };
  check_platforms(labeled);
  if (unlabeled) check_platforms(*unlabeled);
}

template <bool kWithGrads>
Losses run(ModelParams& params, const Batch& labeled, const Batch* unlabeled, const ForwardSettings& settings,
           util::Rng* dropout_rng, ModelParams* grads) {
  check_inputs(params, labeled, unlabeled);
  const bool has_unlabeled = unlabeled && unlabeled->size() > 0;
  const Batch joined = has_unlabeled ? concat(labeled, *unlabeled) : Batch{};
  const Batch& all = has_unlabeled ? joined : labeled;
  const std::size_t n_l = labeled.size();

  EncoderCache ec;
  EncoderOutput enc = encode(params, all, settings.mode, kWithGrads ? &ec : nullptr);
  const Matrix z_l = has_unlabeled ? nn::slice_rows(enc.z, 0, n_l) : enc.z;

  HeadCache hc;
  const std::vector<double> s = head_forward(params, z_l, settings.dropout_rate, dropout_rng, kWithGrads ? &hc : nullptr);
  std::vector<double> y_hat(n_l);
  for (std::size_t i = 0; i < n_l; ++i) {
    const auto& [a, b] = params.calib.at(labeled.platform[i]);
    y_hat[i] = a * s[i] + b;
  }
  const nn::RegressionLoss task = nn::mse_loss(y_hat, labeled.label);

  nn::DenseCache dh_cache, do_cache;
  const Matrix logits = discriminate(params, enc.z, kWithGrads ? &dh_cache : nullptr, kWithGrads ? &do_cache : nullptr);
  const nn::ClassificationLoss dom = nn::cross_entropy_loss(logits, all.platform);

  Losses losses{task.loss, dom.loss};
  if constexpr (!kWithGrads) {
    return losses;
  } else {
    ModelParams& gr = *grads;
    Matrix ds(n_l, 1);
    for (std::size_t i = 0; i < n_l; ++i) {
      auto& pair = gr.calib.pairs[static_cast<std::size_t>(labeled.platform[i])];
      const double a = params.calib.scale(labeled.platform[i]);
      pair[0] += s[i] * task.grad[i];
      pair[1] += task.grad[i];
      ds(i, 0) = a * task.grad[i];
    }
    auto out = nn::dense_backward(params.head_out, hc.out, ds);
    Matrix up = std::move(out.input_grad);
    gr.head_out.weight = std::move(out.weight_grad);
    gr.head_out.bias = std::move(out.bias_grad);
    if (!hc.keep_scale.empty()) {
      for (std::size_t i = 0; i < up.size(); ++i) up.data()[i] *= hc.keep_scale[i];
    }
    auto hidden = nn::dense_backward(params.head_hidden, hc.hidden, up);
    gr.head_hidden.weight = std::move(hidden.weight_grad);
    gr.head_hidden.bias = std::move(hidden.bias_grad);

    const bool need_dom_input = settings.lambda != 0.0;
    auto d_out = nn::dense_backward(params.disc_out, do_cache, dom.grad);
    gr.disc_out.weight = std::move(d_out.weight_grad);
    gr.disc_out.bias = std::move(d_out.bias_grad);
    auto d_hidden = nn::dense_backward(params.disc_hidden, dh_cache, d_out.input_grad, need_dom_input);
    gr.disc_hidden.weight = std::move(d_hidden.weight_grad);
    gr.disc_hidden.bias = std::move(d_hidden.bias_grad);

    Matrix dz = need_dom_input ? nn::grl_backward(nn::grl_forward(d_hidden.input_grad), settings.lambda)
                               : Matrix(all.size(), params.dims.fused_dim());
    for (std::size_t r = 0; r < n_l; ++r) {
      auto dst = dz.row(r);
      const auto src = hidden.input_grad.row(r);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    encoder_backward(params, ec, dz, gr);
    return losses;
  }
}

}  // namespace

std::vector<double> predict_latent(const ModelParams& params, const Batch& batch) {
  std::vector<double> out(batch.size());
  for_each_chunk(batch, [&](const Batch& part, std::size_t offset) {
    const EncoderOutput enc = encode(params, part);
    const auto s = head_forward(params, enc.z, 0.0, nullptr);
    std::ranges::copy(s, out.begin() + static_cast<std::ptrdiff_t>(offset));
  });
  return out;
}

std::vector<double> predict(const ModelParams& params, const Batch& batch) {
  std::vector<double> s = predict_latent(params, batch);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& [a, b] = params.calib.at(batch.platform[i]);
    s[i] = a * s[i] + b;
  }
  return s;
}

double discriminator_accuracy(const ModelParams& params, const Batch& batch) {
  if (batch.size() == 0) throw std::invalid_argument("discriminator_accuracy: empty batch");
  std::size_t correct = 0;
  for_each_chunk(batch, [&](const Batch& part, std::size_t) {
    const Matrix logits = discriminate(params, encode(params, part).z);
    for (std::size_t r = 0; r < part.size(); ++r) {
      const auto row = logits.row(r);
      const auto best = static_cast<int>(std::ranges::max_element(row) - row.begin());
      if (best == part.platform[r]) ++correct;
    }
  });
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

GradientResult compute_gradients(ModelParams& params, const Batch& labeled, const Batch* unlabeled,
                                 const ForwardSettings& settings, util::Rng* dropout_rng) {
  GradientResult result{ModelParams::zeros(params.dims, params.options), {}};
  result.losses = run<true>(params, labeled, unlabeled, settings, dropout_rng, &result.grads);
  return result;
}

Losses compute_losses(ModelParams& params, const Batch& labeled, const Batch* unlabeled,
                      const ForwardSettings& settings, util::Rng* dropout_rng) {
  return run<false>(params, labeled, unlabeled, settings, dropout_rng, nullptr);
}

}  // namespace adaptms::model
