#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace adaptms::nn {

/// A parameter block under test: live values (perturbed in place and restored) and the
/// analytic gradient computed beforehand.
struct GradBlock {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic;
};

struct BlockCheck {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<BlockCheck> blocks;
  double max_rel_error() const;
  std::string to_string() const;
};

struct GradCheckOptions {
  double perturbation = 1e-5;
  /// Entries with |analytic| and |numeric| both below this are compared absolutely;
  /// cancellation in the central difference makes their relative error meaningless.
  double magnitude_floor = 1e-5;
  /// 0 checks every entry; otherwise an evenly strided subset of at most this many.
  std::size_t max_entries_per_block = 0;
  /// Combine steps h and h/2 to cancel the O(h^2) truncation term.
  bool richardson = false;
};

/// Central-difference gradient check: for each entry, (f(x+h) - f(x-h)) / 2h against the
/// analytic gradient. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckReport finite_diff_check(const std::function<double()>& loss,
                                  std::span<const GradBlock> blocks,
                                  const GradCheckOptions& options = {});

}  // namespace adaptms::nn
