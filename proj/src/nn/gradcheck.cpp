#include "adaptms/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adaptms::nn {

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto& b : blocks) worst = std::max(worst, b.max_rel_error);
  return worst;
}

std::string GradCheckReport::to_string() const {
  std::ostringstream os;
  for (const auto& b : blocks) {
    os << b.name << ": checked " << b.checked << ", max rel " << b.max_rel_error << ", max abs "
       << b.max_abs_error << "\n";
  }
  return os.str();
}

GradCheckReport finite_diff_check(const std::function<double()>& loss,
                                  std::span<const GradBlock> blocks,
                                  const GradCheckOptions& options) {
  GradCheckReport report;
  const double h = options.perturbation;
  for (const auto& block : blocks) {
    BlockCheck check{block.name};
    const std::size_t n = block.values.size();
    std::size_t stride = 1;
    if (options.max_entries_per_block > 0 && n > options.max_entries_per_block) {
      stride = (n + options.max_entries_per_block - 1) / options.max_entries_per_block;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = block.values[i];
      block.values[i] = saved + h;
      const double up = loss();
      block.values[i] = saved - h;
      const double down = loss();
      double numeric = (up - down) / (2.0 * h);
      if (options.richardson) {
        block.values[i] = saved + 0.5 * h;
        const double up2 = loss();
        block.values[i] = saved - 0.5 * h;
        const double down2 = loss();
        numeric = (4.0 * (up2 - down2) / h - numeric) / 3.0;
      }
      block.values[i] = saved;
      const double analytic = block.analytic[i];
      const double abs_err = std::abs(analytic - numeric);
      const double scale =
          std::max({std::abs(analytic), std::abs(numeric), options.magnitude_floor});
      check.max_abs_error = std::max(check.max_abs_error, abs_err);
      check.max_rel_error = std::max(check.max_rel_error, abs_err / scale);
      ++check.checked;
    }
    report.blocks.push_back(std::move(check));
  }
  return report;
}

}  // namespace adaptms::nn
