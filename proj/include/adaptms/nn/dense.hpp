#pragma once

#include "adaptms/nn/matrix.hpp"
#include "adaptms/util/rng.hpp"

#include <string_view>
#include <vector>

namespace adaptms::nn {

enum class Activation { identity, relu, sigmoid };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

double sigmoid(double x);

/// Fully connected layer y = act(x·W + b). W is stored in × out.
struct DenseLayer {
  Matrix weight;
  std::vector<double> bias;
  Activation activation = Activation::identity;

  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }

  /// Uniform(-1/sqrt(in), 1/sqrt(in)) weights and biases.
  static DenseLayer init(std::size_t in, std::size_t out, Activation act, util::Rng& rng);
  static DenseLayer zeros(std::size_t in, std::size_t out, Activation act);
};

struct DenseCache {
  Matrix input;
  Matrix pre_activation;
  Matrix output;
};

struct DenseGrads {
  Matrix input_grad;
  Matrix weight_grad;
  std::vector<double> bias_grad;
};

Matrix dense_forward(const DenseLayer& layer, const Matrix& input, DenseCache* cache = nullptr);

/// Reverse-mode gradients for the cached forward call. `upstream` is dL/d(output).
/// Skips the input gradient when `need_input_grad` is false (the first layer after
/// a frozen input).
DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache, const Matrix& upstream,
                          bool need_input_grad = true);

/// Gradient reversal: identity forward, -lambda scaling backward.
inline const Matrix& grl_forward(const Matrix& input) { return input; }
Matrix grl_backward(const Matrix& upstream, double lambda);

}  // namespace adaptms::nn
