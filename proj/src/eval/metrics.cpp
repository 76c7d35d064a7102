#include "adaptms/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptms::eval {

namespace {
void check(std::span<const double> pred, std::span<const double> label, const char* who) {
  if (pred.empty()) throw std::invalid_argument(std::string(who) + ": empty input");
  if (pred.size() != label.size()) {
    throw std::invalid_argument(std::string(who) + ": length mismatch " + std::to_string(pred.size()) +
                                " vs " + std::to_string(label.size()));
  }
}
}  // namespace

double rmse(std::span<const double> pred, std::span<const double> label) {
  check(pred, label, "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += (pred[i] - label[i]) * (pred[i] - label[i]);
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> label) {
  check(pred, label, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - label[i]);
  return acc / static_cast<double>(pred.size());
}

double relative_gain(double baseline_rmse, double model_rmse) {
  if (!(baseline_rmse > 0.0)) {
    throw std::invalid_argument("relative_gain: baseline must be positive, got " + std::to_string(baseline_rmse));
  }
  return (baseline_rmse - model_rmse) / baseline_rmse;
}

MeanSd mean_sd(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_sd: empty input");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

double pooled_sd(std::span<const double> sds) {
  if (sds.empty()) throw std::invalid_argument("pooled_sd: empty input");
  double acc = 0.0;
  for (double s : sds) acc += s * s;
  return std::sqrt(acc / static_cast<double>(sds.size()));
}

}  // namespace adaptms::eval
