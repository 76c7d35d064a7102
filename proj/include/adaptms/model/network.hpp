#pragma once

#include "adaptms/data/split.hpp"
#include "adaptms/embed/embedding_table.hpp"
#include "adaptms/model/params.hpp"
#include "adaptms/util/rng.hpp"

#include <span>
#include <vector>

namespace adaptms::model {

/// Model-ready rows: frozen text embeddings plus imputed behavior.
struct Batch {
  nn::Matrix text;      // n x text_dim
  nn::Matrix behavior;  // n x 6, no NaN
  std::vector<double> modality;
  std::vector<int> platform;
  std::vector<double> label;  // empty when unlabeled
  std::vector<data::InstanceId> ids;

  std::size_t size() const { return platform.size(); }
  bool labeled() const { return label.size() == platform.size(); }
};

/// Gathers rows of an imputed corpus. Throws if a selected instance still has a missing
/// behavior value.
Batch make_batch(const data::Corpus& corpus, const embed::EmbeddingTable& embeddings,
                 std::span<const std::size_t> indices, bool with_labels = true);
/// Rows of `a` followed by rows of `b`; labels are kept only when both are labeled.
Batch concat(const Batch& a, const Batch& b);
Batch subset(const Batch& batch, std::span<const std::size_t> rows);

/// Replaces each instance's behavior by its platform's imputation constants with
/// probability p_mod and sets m = 0 for it. `dropped` (optional) receives the mask.
Batch modality_dropout(const Batch& batch, double p_mod, util::Rng& rng,
                       const data::ImputationTable& fill, std::vector<bool>* dropped = nullptr);

struct BehaviorCache {
  nn::Matrix transformed;  // log1p input
  nn::DenseCache in, mid, out;
  nn::BatchNormCache bn1, bn2;
};

struct EncoderCache {
  nn::DenseCache text;
  BehaviorCache behavior;
  nn::Matrix h, g;
  std::vector<double> modality;  // as seen by the gate (after option overrides)
  std::vector<double> alpha;
};

struct EncoderOutput {
  nn::Matrix z;  // [h ; alpha * g]
  std::vector<double> alpha;
};

/// phi(b): log1p transform, then the 3-layer MLP with batch norm.
nn::Matrix behavior_embed(ModelParams& params, const nn::Matrix& behavior, nn::Mode mode,
                          BehaviorCache* cache = nullptr);
/// alpha_i = sigmoid(w . [h_i ; m_i] + b).
std::vector<double> gate(const ModelParams& params, const nn::Matrix& h,
                         std::span<const double> modality);
nn::Matrix fuse(const nn::Matrix& h, const nn::Matrix& g, std::span<const double> alpha);

EncoderOutput encode(ModelParams& params, const Batch& batch, nn::Mode mode,
                     EncoderCache* cache = nullptr);
EncoderOutput encode(const ModelParams& params, const Batch& batch);  // eval mode

struct HeadCache {
  nn::DenseCache hidden;
  std::vector<double> keep_scale;  // inverted-dropout factors, empty in eval
  nn::DenseCache out;
};

/// Uncalibrated score s. Dropout is applied only when `dropout_rng` is given.
std::vector<double> head_forward(const ModelParams& params, const nn::Matrix& z, double dropout_rate,
                                 util::Rng* dropout_rng, HeadCache* cache = nullptr);
nn::Matrix discriminate(const ModelParams& params, const nn::Matrix& z,
                        nn::DenseCache* hidden = nullptr, nn::DenseCache* out = nullptr);

/// Eval-mode latent scores s, processed in chunks.
std::vector<double> predict_latent(const ModelParams& params, const Batch& batch);
/// Eval-mode calibrated predictions using each row's own platform pair.
std::vector<double> predict(const ModelParams& params, const Batch& batch);
/// Fraction of rows whose discriminator argmax equals the platform id (eval mode).
double discriminator_accuracy(const ModelParams& params, const Batch& batch);

struct Losses {
  double task = 0.0;
  double domain = 0.0;
};

struct GradientResult {
  ModelParams grads;
  Losses losses;
};

struct ForwardSettings {
  double lambda = 0.0;
  double dropout_rate = 0.0;
  nn::Mode mode = nn::Mode::train;
};

/// Gradients of one adversarial step. `labeled` feeds the task loss; every row of
/// [labeled ; unlabeled] feeds the domain loss with its platform id as the class.
/// Encoder blocks receive dL_task/dtheta - lambda * dL_dom/dtheta via gradient reversal;
/// discriminator blocks receive dL_dom/dtheta. Train mode updates the running statistics
/// held in `params`.
GradientResult compute_gradients(ModelParams& params, const Batch& labeled, const Batch* unlabeled,
                                 const ForwardSettings& settings, util::Rng* dropout_rng);

/// Losses of the same forward pass without gradients (used by finite-difference checks).
Losses compute_losses(ModelParams& params, const Batch& labeled, const Batch* unlabeled,
                      const ForwardSettings& settings, util::Rng* dropout_rng);

}  // namespace adaptms::model
