#include "hybridfl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hybridfl/errors.hpp"

namespace hybridfl {
namespace {

void check_inputs(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size()) {
    throw ShapeError("loss: " + std::to_string(probabilities.size()) +
                     " probabilities vs " + std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("loss: label at index " + std::to_string(i) + " is not 0/1");
    }
    if (!std::isfinite(probabilities[i])) {
      throw NumericError("loss: non-finite probability at index " + std::to_string(i));
    }
  }
}

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

}  // namespace

LossResult bce_loss(std::span<const double> probabilities, std::span<const int> labels) {
  check_inputs(probabilities, labels);
  const std::size_t n = labels.size();
  LossResult r;
  r.per_sample.resize(n);
  r.grad_wrt_logits.resize(n);
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clamp_probability(probabilities[i]);
    const double y = labels[i];
    const double loss = -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    r.per_sample[i] = loss;
    total += loss;
    r.grad_wrt_logits[i] = (p - y) * inv_n;
  }
  r.mean_loss = total * inv_n;
  return r;
}

LossResult focal_loss(std::span<const double> probabilities, std::span<const int> labels,
                      double alpha, double gamma) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("focal loss alpha must lie in (0, 1)");
  }
  if (!(gamma >= 0.0)) throw ConfigError("focal loss gamma must be >= 0");
  check_inputs(probabilities, labels);
  const std::size_t n = labels.size();
  LossResult r;
  r.per_sample.resize(n);
  r.grad_wrt_logits.resize(n);
  if (n == 0) return r;
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = clamp_probability(probabilities[i]);
    const bool positive = labels[i] == 1;
    const double pt = positive ? p : 1.0 - p;
    const double at = positive ? alpha : 1.0 - alpha;
    const double sign = positive ? 1.0 : -1.0;
    const double q = 1.0 - pt;
    const double log_pt = std::log(pt);
    const double loss = -at * std::pow(q, gamma) * log_pt;
    r.per_sample[i] = loss;
    total += loss;
    // d(loss)/dz with p_t = sigmoid(sign * z).
    r.grad_wrt_logits[i] =
        sign * at * std::pow(q, gamma) * (gamma * pt * log_pt - q) * inv_n;
  }
  r.mean_loss = total * inv_n;
  return r;
}

std::string LossConfig::describe() const {
  if (kind == LossKind::kBce) return "bce";
  std::ostringstream os;
  os << "focal(alpha=" << alpha << ",gamma=" << gamma << ")";
  return os.str();
}

LossResult compute_loss(const LossConfig& config, std::span<const double> probabilities,
                        std::span<const int> labels) {
  if (config.kind == LossKind::kBce) return bce_loss(probabilities, labels);
  return focal_loss(probabilities, labels, config.alpha, config.gamma);
}

}  // namespace hybridfl
