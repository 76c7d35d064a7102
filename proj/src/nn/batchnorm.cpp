#include "adaptms/nn/batchnorm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptms::nn {

BatchNormState BatchNormState::init(std::size_t dim, double momentum, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("batchnorm epsilon must be positive");
  BatchNormState s;
  s.gamma.assign(dim, 1.0);
  s.beta.assign(dim, 0.0);
  s.running_mean.assign(dim, 0.0);
  s.running_var.assign(dim, 1.0);
  s.momentum = momentum;
  s.epsilon = epsilon;
  return s;
}

Matrix batchnorm_forward(BatchNormState& state, const Matrix& input, Mode mode,
                         BatchNormCache* cache) {
  const std::size_t n = input.rows();
  const std::size_t d = input.cols();
  if (d != state.dim()) {
    throw ShapeError("batchnorm_forward: input " + input.shape_string() + " vs state dim " +
                     std::to_string(state.dim()));
  }
  if (mode == Mode::train && n < 2) {
    throw std::invalid_argument("batchnorm_forward: train mode needs batch size >= 2, got " +
                                std::to_string(n));
  }

  std::vector<double> mean(d, 0.0);
  std::vector<double> var(d, 0.0);
  if (mode == Mode::train) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = input.row(r);
      for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = input.row(r);
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = row[c] - mean[c];
        var[c] += diff * diff;
      }
    }
    for (double& v : var) v /= static_cast<double>(n);
    const double unbias = static_cast<double>(n) / static_cast<double>(n - 1);
    for (std::size_t c = 0; c < d; ++c) {
      state.running_mean[c] = state.momentum * state.running_mean[c] + (1.0 - state.momentum) * mean[c];
      state.running_var[c] =
          state.momentum * state.running_var[c] + (1.0 - state.momentum) * var[c] * unbias;
    }
  } else {
    mean = state.running_mean;
    var = state.running_var;
  }

  std::vector<double> inv_std(d);
  for (std::size_t c = 0; c < d; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + state.epsilon);

  Matrix normalized(n, d);
  Matrix out(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto in = input.row(r);
    auto xn = normalized.row(r);
    auto y = out.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      xn[c] = (in[c] - mean[c]) * inv_std[c];
      y[c] = state.gamma[c] * xn[c] + state.beta[c];
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

BatchNormGrads batchnorm_backward(const BatchNormState& state, const BatchNormCache& cache,
                                  const Matrix& upstream) {
  const std::size_t n = upstream.rows();
  const std::size_t d = upstream.cols();
  if (n != cache.normalized.rows() || d != cache.normalized.cols()) {
    throw ShapeError("batchnorm_backward: upstream " + upstream.shape_string() + " vs cache " +
                     cache.normalized.shape_string());
  }
  BatchNormGrads g;
  g.gamma_grad.assign(d, 0.0);
  g.beta_grad.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto dy = upstream.row(r);
    const auto xn = cache.normalized.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      g.gamma_grad[c] += dy[c] * xn[c];
      g.beta_grad[c] += dy[c];
    }
  }
  g.input_grad = Matrix(n, d);
  if (cache.mode == Mode::eval) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto dy = upstream.row(r);
      auto dx = g.input_grad.row(r);
      for (std::size_t c = 0; c < d; ++c) dx[c] = dy[c] * state.gamma[c] * cache.inv_std[c];
    }
    return g;
  }
  // dx = gamma * inv_std / n * (n*dy - sum(dy) - xn * sum(dy*xn))
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto dy = upstream.row(r);
    const auto xn = cache.normalized.row(r);
    auto dx = g.input_grad.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      dx[c] = state.gamma[c] * cache.inv_std[c] * inv_n *
              (static_cast<double>(n) * dy[c] - g.beta_grad[c] - xn[c] * g.gamma_grad[c]);
    }
  }
  return g;
}

}  // namespace adaptms::nn
