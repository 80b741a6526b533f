#pragma once

#include <cstdint>

#include "hybridfl/mlp.hpp"

namespace hybridfl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  MlpGrads first_moment;
  MlpGrads second_moment;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros_for(const MlpParams& params, AdamConfig config = {});
};

// Bias-corrected Adam. Increments state.step_count by one.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               double learning_rate);

void sgd_step(MlpParams& params, const MlpGrads& grads, double learning_rate);

enum class OptimizerKind { kAdam, kSgd };

// Owns the per-network optimiser state; SGD exists for the oracle checks.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, const MlpParams& params, AdamConfig config = {});

  void step(MlpParams& params, const MlpGrads& grads, double learning_rate);

  OptimizerKind kind() const { return kind_; }
  std::int64_t steps() const { return steps_; }
  const AdamState& adam_state() const { return adam_; }

 private:
  OptimizerKind kind_ = OptimizerKind::kAdam;
  AdamState adam_;
  std::int64_t steps_ = 0;
};

}  // namespace hybridfl
