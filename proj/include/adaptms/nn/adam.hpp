#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace adaptms::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;

  AdamState() = default;
  AdamState(std::size_t n, AdamConfig cfg)
      : config(cfg), first_moment(n, 0.0), second_moment(n, 0.0) {}
};

/// One bias-corrected Adam update over a flat parameter vector.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

/// Update of one parameter block that shares the step counter `t` (already incremented)
/// with other blocks of the same optimizer.
void adam_update_block(std::span<double> params, std::span<const double> grads,
                       std::span<double> m, std::span<double> v, std::uint64_t t,
                       const AdamConfig& cfg);

}  // namespace adaptms::nn
