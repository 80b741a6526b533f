#pragma once

#include <span>
#include <string>
#include <vector>

namespace hybridfl {

// Probabilities are clamped into [kProbabilityClamp, 1 - kProbabilityClamp]
// before taking logs.
inline constexpr double kProbabilityClamp = 1e-7;

struct LossResult {
  double mean_loss = 0.0;
  std::vector<double> per_sample;
  // d(mean_loss)/d(logit) through the sigmoid, already divided by n.
  std::vector<double> grad_wrt_logits;
};

LossResult bce_loss(std::span<const double> probabilities,
                    std::span<const int> labels);

// Per sample: -alpha_t * (1 - p_t)^gamma * ln(p_t), where alpha weights
// the positive class and (1 - alpha) the negative one.
LossResult focal_loss(std::span<const double> probabilities,
                      std::span<const int> labels, double alpha, double gamma);

enum class LossKind { kBce, kFocal };

struct LossConfig {
  LossKind kind = LossKind::kBce;
  double alpha = 0.25;
  double gamma = 2.0;

  static LossConfig bce() { return {}; }
  static LossConfig focal(double alpha, double gamma) {
    return {LossKind::kFocal, alpha, gamma};
  }
  std::string describe() const;
};

LossResult compute_loss(const LossConfig& config,
                        std::span<const double> probabilities,
                        std::span<const int> labels);

}  // namespace hybridfl
