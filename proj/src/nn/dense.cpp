#include "adaptms/nn/dense.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptms::nn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseLayer DenseLayer::init(std::size_t in, std::size_t out, Activation act, util::Rng& rng) {
  DenseLayer layer = zeros(in, out, act);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
  for (double& b : layer.bias) b = rng.uniform(-bound, bound);
  return layer;
}

DenseLayer DenseLayer::zeros(std::size_t in, std::size_t out, Activation act) {
  return DenseLayer{Matrix(in, out), std::vector<double>(out, 0.0), act};
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& input, DenseCache* cache) {
  if (input.cols() != layer.in_dim()) {
    throw ShapeError("dense_forward: input " + input.shape_string() + " vs weight " +
                     layer.weight.shape_string());
  }
  Matrix pre = matmul(input, layer.weight);
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    auto row = pre.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += layer.bias[c];
  }
  Matrix out = pre;
  switch (layer.activation) {
    case Activation::identity: break;
    case Activation::relu:
      for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::sigmoid:
      for (double& v : out.values()) v = sigmoid(v);
      break;
  }
  if (cache) {
    cache->input = input;
    cache->pre_activation = std::move(pre);
    cache->output = out;
  }
  return out;
}

DenseGrads dense_backward(const DenseLayer& layer, const DenseCache& cache, const Matrix& upstream,
                          bool need_input_grad) {
  if (upstream.rows() != cache.output.rows() || upstream.cols() != cache.output.cols()) {
    throw ShapeError("dense_backward: upstream " + upstream.shape_string() + " vs output " +
                     cache.output.shape_string());
  }
  // dL/d(pre-activation)
  Matrix delta = upstream;
  switch (layer.activation) {
    case Activation::identity: break;
    case Activation::relu: {
      auto d = delta.values();
      auto pre = cache.pre_activation.values();
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (pre[i] <= 0.0) d[i] = 0.0;
      }
      break;
    }
    case Activation::sigmoid: {
      auto d = delta.values();
      auto y = cache.output.values();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (1.0 - y[i]);
      break;
    }
  }
  DenseGrads grads;
  grads.weight_grad = matmul_tn(cache.input, delta);
  grads.bias_grad = column_sums(delta);
  if (need_input_grad) grads.input_grad = matmul_nt(delta, layer.weight);
  return grads;
}

Matrix grl_backward(const Matrix& upstream, double lambda) {
  Matrix out = upstream;
  for (double& v : out.values()) v *= -lambda;
  return out;
}

}  // namespace adaptms::nn
