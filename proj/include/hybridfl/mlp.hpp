#pragma once

#include <cstddef>
#include <vector>

#include "hybridfl/matrix.hpp"
#include "hybridfl/random.hpp"

namespace hybridfl {

enum class OutputActivation { kNone, kSigmoid };

struct LayerParams {
  Matrix weights;            // [out_dim x in_dim]
  std::vector<double> bias;  // [out_dim]

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Architecture description used to initialise an MlpParams.
struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t output_dim = 0;
  OutputActivation output_activation = OutputActivation::kNone;
  double dropout_rate = 0.0;
};

// ReLU on every hidden layer, optional sigmoid on the output layer and
// inverted dropout on hidden activations while training.
struct MlpParams {
  std::vector<LayerParams> layers;
  OutputActivation output_activation = OutputActivation::kNone;
  double dropout_rate = 0.0;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;

  // Throws ShapeError on inconsistent layer dims, ConfigError on a bad
  // dropout rate.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

// Gradients (and optimiser moments) share the layer layout of the params.
struct MlpGrads {
  std::vector<LayerParams> layers;
};

bool same_shape(const MlpParams& a, const MlpParams& b);
bool same_shape(const MlpParams& params, const MlpGrads& grads);
MlpGrads zero_grads(const MlpParams& params);
void accumulate(MlpGrads& into, const MlpGrads& other);

// He-uniform weights (limit sqrt(6 / fan_in)), zero bias.
MlpParams init_mlp(const MlpSpec& spec, Rng& rng);

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activations;  // z for every layer
  std::vector<Matrix> activations;      // layer outputs, after dropout
  std::vector<Matrix> dropout_masks;    // per hidden layer; empty if unused
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

// `rng` may be null unless training with a non-zero dropout rate.
ForwardResult mlp_forward(const MlpParams& params, const Matrix& input,
                          bool training, Rng* rng);

// Selects what `output_grad` is taken with respect to. kLogits skips the
// output activation derivative, which is how the losses hand back their
// sigmoid-composed gradients.
enum class GradientOf { kOutput, kLogits };

struct BackwardResult {
  MlpGrads param_grads;
  Matrix input_grad;
};

BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache,
                            const Matrix& output_grad,
                            GradientOf wrt = GradientOf::kOutput);

double sigmoid(double x);

}  // namespace hybridfl
