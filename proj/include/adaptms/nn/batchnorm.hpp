#pragma once

#include "adaptms/nn/matrix.hpp"

#include <vector>

namespace adaptms::nn {

enum class Mode { train, eval };

/// Per-column batch normalization with learned affine (gamma, beta).
struct BatchNormState {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  /// running <- momentum * running + (1 - momentum) * batch statistic
  double momentum = 0.9;
  double epsilon = 1e-5;

  static BatchNormState init(std::size_t dim, double momentum = 0.9, double epsilon = 1e-5);
  std::size_t dim() const { return gamma.size(); }
};

struct BatchNormCache {
  Mode mode = Mode::eval;
  Matrix normalized;
  std::vector<double> inv_std;
};

struct BatchNormGrads {
  Matrix input_grad;
  std::vector<double> gamma_grad;
  std::vector<double> beta_grad;
};

/// Train mode normalizes with the batch mean and biased batch variance and folds the
/// batch statistics into the running estimates (the running variance uses the unbiased
/// estimate). Eval mode uses the running estimates and leaves the state untouched.
Matrix batchnorm_forward(BatchNormState& state, const Matrix& input, Mode mode,
                         BatchNormCache* cache = nullptr);

BatchNormGrads batchnorm_backward(const BatchNormState& state, const BatchNormCache& cache,
                                  const Matrix& upstream);

}  // namespace adaptms::nn
