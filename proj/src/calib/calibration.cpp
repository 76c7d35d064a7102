#include "adaptms/calib/calibration.hpp"

#include "adaptms/util/float_io.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptms::calib {

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments population_moments(std::span<const double> v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.sd = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

}  // namespace

CalibrationParams CalibrationParams::identity(std::size_t num_platforms) {
  CalibrationParams c;
  c.pairs.assign(num_platforms, {1.0, 0.0});
  return c;
}

const std::array<double, 2>& CalibrationParams::at(int platform) const {
  if (platform < 0 || static_cast<std::size_t>(platform) >= pairs.size()) {
    throw std::out_of_range("calibration: unknown platform id " + std::to_string(platform));
  }
  return pairs[static_cast<std::size_t>(platform)];
}

void CalibrationParams::set(int platform, double scale, double bias) {
  at(platform);
  pairs[static_cast<std::size_t>(platform)] = {scale, bias};
}

void TargetRatingStats::validate() const {
  if (!std::isfinite(hist_mean)) throw std::invalid_argument("target rating mean must be finite");
  if (!(hist_sd > 0.0) || !std::isfinite(hist_sd)) {
    throw std::invalid_argument("target rating sd must be positive");
  }
}

TargetRatingStats TargetRatingStats::from_ratings(std::span<const double> ratings) {
  if (ratings.empty()) throw std::invalid_argument("target rating stats: no ratings");
  const Moments m = population_moments(ratings);
  return {m.mean, m.sd};
}

std::vector<double> apply_calibration(const CalibrationParams& calib, std::span<const double> latent,
                                      int platform) {
  const auto& [a, b] = calib.at(platform);
  std::vector<double> out(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i) out[i] = a * latent[i] + b;
  return out;
}

AffineMap fit_unsupervised(std::span<const double> latent, const TargetRatingStats& stats) {
  stats.validate();
  if (latent.size() < 2) throw std::invalid_argument("fit_unsupervised: need at least 2 predictions");
  const Moments m = population_moments(latent);
  if (!(m.sd > 0.0)) {
    throw std::invalid_argument("fit_unsupervised: predictions have zero spread (degenerate predictor)");
  }
  AffineMap map;
  map.scale = stats.hist_sd / m.sd;
  map.bias = stats.hist_mean - map.scale * m.mean;
  return map;
}

AffineMap fit_least_squares(std::span<const double> latent, std::span<const double> labels) {
  if (latent.size() != labels.size() || latent.size() < 2) {
    throw std::invalid_argument("fit_least_squares: need >= 2 paired values");
  }
  const Moments ms = population_moments(latent);
  const Moments my = population_moments(labels);
  if (!(ms.sd > 0.0)) throw std::invalid_argument("fit_least_squares: constant predictions");
  double cov = 0.0;
  for (std::size_t i = 0; i < latent.size(); ++i) cov += (latent[i] - ms.mean) * (labels[i] - my.mean);
  cov /= static_cast<double>(latent.size());
  AffineMap map;
  map.scale = cov / (ms.sd * ms.sd);
  map.bias = my.mean - map.scale * ms.mean;
  return map;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  const Moments mx = population_moments(x);
  const Moments my = population_moments(y);
  if (!(mx.sd > 0.0) || !(my.sd > 0.0)) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx.mean) * (y[i] - my.mean);
  return cov / static_cast<double>(x.size()) / (mx.sd * my.sd);
}

std::string format_calibration_table(const CalibrationParams& calib,
                                     const std::vector<std::string>& platform_names) {
  std::string out = "platform\ta\tb\n";
  for (std::size_t p = 0; p < calib.size(); ++p) {
    out += p < platform_names.size() ? platform_names[p] : std::to_string(p);
    out += '\t';
    util::append_double(out, calib.pairs[p][0]);
    out += '\t';
    util::append_double(out, calib.pairs[p][1]);
    out += '\n';
  }
  return out;
}

}  // namespace adaptms::calib
