#pragma once

#include "adaptms/calib/calibration.hpp"
#include "adaptms/nn/batchnorm.hpp"
#include "adaptms/nn/dense.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adaptms::model {

struct ModelDims {
  std::size_t text_dim = 768;
  std::size_t proj_dim = 256;
  std::size_t behavior_hidden = 128;
  std::size_t fusion_hidden = 512;
  std::size_t disc_hidden = 128;
  std::size_t num_platforms = 3;

  std::size_t fused_dim() const { return 2 * proj_dim; }
  void validate() const;
  bool operator==(const ModelDims&) const = default;
};

/// Architecture switches used by the ablations.
struct ModelOptions {
  bool gate_enabled = true;      ///< false: alpha is fixed at 1
  bool behavior_enabled = true;  ///< false: behavior input zeroed and m forced to 0
  bool operator==(const ModelOptions&) const = default;
};

struct ParamView {
  std::string name;
  std::span<double> values;
};

struct ConstParamView {
  std::string name;
  std::span<const double> values;
};

/// Full parameter set. The same struct doubles as the gradient container.
struct ModelParams {
  ModelDims dims;
  ModelOptions options;

  nn::DenseLayer text_proj;  // text_dim -> proj_dim, identity

  nn::DenseLayer behavior_in;  // 6 -> behavior_hidden, relu
  nn::BatchNormState behavior_bn1;
  nn::DenseLayer behavior_mid;  // behavior_hidden -> behavior_hidden, relu
  nn::BatchNormState behavior_bn2;
  nn::DenseLayer behavior_out;  // behavior_hidden -> proj_dim

  std::vector<double> gate_weight;  // proj_dim + 1 (last entry multiplies m)
  std::vector<double> gate_bias;    // size 1

  nn::DenseLayer head_hidden;  // fused -> fusion_hidden, relu
  nn::DenseLayer head_out;     // fusion_hidden -> 1

  nn::DenseLayer disc_hidden;  // fused -> disc_hidden, relu
  nn::DenseLayer disc_out;     // disc_hidden -> num_platforms

  calib::CalibrationParams calib;

  static ModelParams init(const ModelDims& dims, const ModelOptions& options, std::uint64_t seed);
  /// Same shapes, every value zero (including batch-norm scales).
  static ModelParams zeros(const ModelDims& dims, const ModelOptions& options);

  /// Learnable blocks in a fixed order.
  std::vector<ParamView> trainable();
  std::vector<ConstParamView> trainable() const;
  /// Learnable blocks followed by the batch-norm running statistics.
  std::vector<ParamView> state();
  std::vector<ConstParamView> state() const;
};

enum class BlockGroup { encoder, head, discriminator, calibration, running_stat };

BlockGroup block_group(std::string_view block_name);
std::string calib_block_name(int platform);

/// sha256 fingerprint over all state blocks (names and bit patterns).
std::string params_fingerprint(const ModelParams& params);
/// Fingerprint of the blocks accepted by `filter`.
std::string params_fingerprint(const ModelParams& params,
                               const std::function<bool(std::string_view)>& filter);

}  // namespace adaptms::model
