#pragma once

#include <span>
#include <vector>

namespace adaptms::eval {

/// Root-mean-square error. Throws on empty or mismatched inputs.
double rmse(std::span<const double> pred, std::span<const double> label);
double mae(std::span<const double> pred, std::span<const double> label);

/// (baseline - model) / baseline. Throws unless baseline > 0.
double relative_gain(double baseline_rmse, double model_rmse);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  ///< sample sd (n - 1); 0 for a single value
};
MeanSd mean_sd(std::span<const double> values);

/// sqrt of the average of the given variances; the spread used for k-monotonicity checks.
double pooled_sd(std::span<const double> sds);

}  // namespace adaptms::eval
