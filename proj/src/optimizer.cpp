#include "hybridfl/optimizer.hpp"

#include <cmath>

#include "hybridfl/errors.hpp"

namespace hybridfl {

AdamState AdamState::zeros_for(const MlpParams& params, AdamConfig config) {
  AdamState s;
  s.first_moment = zero_grads(params);
  s.second_moment = zero_grads(params);
  s.beta1 = config.beta1;
  s.beta2 = config.beta2;
  s.epsilon = config.epsilon;
  return s;
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               double learning_rate) {
  if (!same_shape(params, grads) || !same_shape(params, state.first_moment) ||
      !same_shape(params, state.second_moment)) {
    throw ShapeError("adam_step: params, grads and moments differ in shape");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double eps = state.epsilon;

  auto update = [&](double* p, const double* g, double* m, double* v, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    auto& m = state.first_moment.layers[l];
    auto& v = state.second_moment.layers[l];
    update(p.weights.data().data(), g.weights.data().data(), m.weights.data().data(),
           v.weights.data().data(), p.weights.size());
    update(p.bias.data(), g.bias.data(), m.bias.data(), v.bias.data(), p.bias.size());
    require_finite(p.weights, "adam_step weights");
  }
}

void sgd_step(MlpParams& params, const MlpGrads& grads, double learning_rate) {
  if (!same_shape(params, grads)) throw ShapeError("sgd_step: shape mismatch");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    const auto& g = grads.layers[l];
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
      p.weights.data()[k] -= learning_rate * g.weights.data()[k];
    }
    for (std::size_t k = 0; k < p.bias.size(); ++k) p.bias[k] -= learning_rate * g.bias[k];
  }
}

Optimizer::Optimizer(OptimizerKind kind, const MlpParams& params, AdamConfig config)
    : kind_(kind) {
  if (kind_ == OptimizerKind::kAdam) adam_ = AdamState::zeros_for(params, config);
}

void Optimizer::step(MlpParams& params, const MlpGrads& grads, double learning_rate) {
  if (kind_ == OptimizerKind::kAdam) {
    adam_step(params, grads, adam_, learning_rate);
  } else {
    sgd_step(params, grads, learning_rate);
  }
  ++steps_;
}

}  // namespace hybridfl
