#pragma once

#include "adaptms/nn/matrix.hpp"

#include <span>
#include <vector>

namespace adaptms::nn {

struct RegressionLoss {
  double loss = 0.0;
  std::vector<double> grad;
};

struct ClassificationLoss {
  double loss = 0.0;
  Matrix grad;
};

/// Mean squared error and its gradient 2(pred - label)/n.
RegressionLoss mse_loss(std::span<const double> pred, std::span<const double> label);

/// Mean softmax cross-entropy over rows; logits are max-shifted before exponentiation.
ClassificationLoss cross_entropy_loss(const Matrix& logits, std::span<const int> labels);

/// Row-wise softmax probabilities.
Matrix softmax(const Matrix& logits);

}  // namespace adaptms::nn
