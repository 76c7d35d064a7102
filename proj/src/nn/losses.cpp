#include "adaptms/nn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptms::nn {

RegressionLoss mse_loss(std::span<const double> pred, std::span<const double> label) {
  if (pred.size() != label.size()) {
    throw ShapeError("mse_loss: pred length " + std::to_string(pred.size()) + " vs label length " +
                     std::to_string(label.size()));
  }
  if (pred.empty()) throw std::invalid_argument("mse_loss: empty input");
  const double n = static_cast<double>(pred.size());
  RegressionLoss out;
  out.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - label[i];
    out.loss += r * r;
    out.grad[i] = 2.0 * r / n;
  }
  out.loss /= n;
  return out;
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto in = logits.row(r);
    auto out = p.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - mx);
      z += out[c];
    }
    for (double& v : out) v /= z;
  }
  return p;
}

ClassificationLoss cross_entropy_loss(const Matrix& logits, std::span<const int> labels) {
  if (logits.rows() != labels.size()) {
    throw ShapeError("cross_entropy_loss: logits " + logits.shape_string() + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (logits.rows() == 0) throw std::invalid_argument("cross_entropy_loss: empty batch");
  const double n = static_cast<double>(logits.rows());
  ClassificationLoss out;
  out.grad = Matrix(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) {
      throw std::out_of_range("cross_entropy_loss: class index " + std::to_string(y) +
                              " outside [0," + std::to_string(logits.cols()) + ")");
    }
    const auto in = logits.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - mx);
    const double log_z = std::log(z) + mx;
    out.loss += log_z - in[y];
    auto g = out.grad.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) g[c] = std::exp(in[c] - log_z) / n;
    g[y] -= 1.0 / n;
  }
  out.loss /= n;
  return out;
}

}  // namespace adaptms::nn
