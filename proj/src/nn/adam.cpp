#include "adaptms/nn/adam.hpp"

#include "adaptms/nn/matrix.hpp"

#include <cmath>
#include <string>

namespace adaptms::nn {

void adam_update_block(std::span<double> params, std::span<const double> grads,
                       std::span<double> m, std::span<double> v, std::uint64_t t,
                       const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size()) {
    throw ShapeError("adam: size mismatch (params " + std::to_string(params.size()) + ", grads " +
                     std::to_string(grads.size()) + ", state " + std::to_string(m.size()) + ")");
  }
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: state sized for " + std::to_string(state.first_moment.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  ++state.step_count;
  adam_update_block(params, grads, state.first_moment, state.second_moment, state.step_count,
                    state.config);
}

}  // namespace adaptms::nn
