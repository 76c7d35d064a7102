#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace adaptms::calib {

/// Per-platform affine maps y = a_p * s + b_p, stored as {a_p, b_p}.
struct CalibrationParams {
  std::vector<std::array<double, 2>> pairs;

  static CalibrationParams identity(std::size_t num_platforms);

  std::size_t size() const { return pairs.size(); }
  double scale(int platform) const { return at(platform)[0]; }
  double bias(int platform) const { return at(platform)[1]; }
  void set(int platform, double scale, double bias);
  const std::array<double, 2>& at(int platform) const;

  bool operator==(const CalibrationParams&) const = default;
};

/// Historical rating moments of the target platform.
struct TargetRatingStats {
  double hist_mean = 0.0;
  double hist_sd = 1.0;

  void validate() const;
  /// Population mean and standard deviation of the given ratings.
  static TargetRatingStats from_ratings(std::span<const double> ratings);
};

struct AffineMap {
  double scale = 1.0;
  double bias = 0.0;
};

/// Elementwise a_p * s + b_p; no clipping.
std::vector<double> apply_calibration(const CalibrationParams& calib, std::span<const double> latent,
                                      int platform);

/// Moment matching: scale = sd_y / sd_s and bias = mean_y - scale * mean_s, with population
/// standard deviations. `latent` are the model's uncalibrated scores on unlabeled target data.
AffineMap fit_unsupervised(std::span<const double> latent, const TargetRatingStats& stats);

/// Ordinary least squares y ~ scale * s + bias.
AffineMap fit_least_squares(std::span<const double> latent, std::span<const double> labels);

/// Pearson correlation; 0 when either side is constant.
double correlation(std::span<const double> x, std::span<const double> y);

/// "platform\ta\tb" audit table.
std::string format_calibration_table(const CalibrationParams& calib,
                                     const std::vector<std::string>& platform_names);

}  // namespace adaptms::calib
