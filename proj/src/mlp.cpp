#include "hybridfl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hybridfl/errors.hpp"

namespace hybridfl {
namespace {

// out = in * W^T + b, with W stored [out x in]. The inner loop runs over
// the output dimension of a transposed copy so it is a plain axpy.
Matrix affine(const Matrix& in, const LayerParams& layer) {
  const std::size_t batch = in.rows();
  const std::size_t n_in = layer.in_dim();
  const std::size_t n_out = layer.out_dim();
  const Matrix wt = layer.weights.transposed();
  Matrix out(batch, n_out);
  for (std::size_t b = 0; b < batch; ++b) {
    double* o = out.row(b).data();
    std::copy(layer.bias.begin(), layer.bias.end(), o);
    const double* x = in.row(b).data();
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* w = wt.row(i).data();
      for (std::size_t j = 0; j < n_out; ++j) o[j] += xi * w[j];
    }
  }
  return out;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t MlpParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().in_dim();
}

std::size_t MlpParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().out_dim();
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void MlpParams::validate() const {
  if (layers.empty()) throw ShapeError("MLP has no layers");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1), got " +
                      std::to_string(dropout_rate));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias length mismatch");
    }
    if (i + 1 < layers.size() && l.out_dim() != layers[i + 1].in_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " output dim " +
                       std::to_string(l.out_dim()) + " != next input dim " +
                       std::to_string(layers[i + 1].in_dim()));
    }
  }
}

bool same_shape(const MlpParams& a, const MlpParams& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].weights.rows() != b.layers[i].weights.rows() ||
        a.layers[i].weights.cols() != b.layers[i].weights.cols() ||
        a.layers[i].bias.size() != b.layers[i].bias.size()) {
      return false;
    }
  }
  return true;
}

bool same_shape(const MlpParams& params, const MlpGrads& grads) {
  MlpParams tmp;
  tmp.layers = grads.layers;
  return same_shape(params, tmp);
}

MlpGrads zero_grads(const MlpParams& params) {
  MlpGrads g;
  g.layers.reserve(params.layers.size());
  for (const auto& l : params.layers) {
    g.layers.push_back({Matrix(l.out_dim(), l.in_dim()),
                        std::vector<double>(l.out_dim(), 0.0)});
  }
  return g;
}

void accumulate(MlpGrads& into, const MlpGrads& other) {
  if (into.layers.size() != other.layers.size()) {
    throw ShapeError("gradient accumulate: layer count mismatch");
  }
  for (std::size_t i = 0; i < into.layers.size(); ++i) {
    auto& dst = into.layers[i];
    const auto& src = other.layers[i];
    if (dst.weights.size() != src.weights.size() || dst.bias.size() != src.bias.size()) {
      throw ShapeError("gradient accumulate: layer shape mismatch");
    }
    for (std::size_t k = 0; k < dst.weights.size(); ++k) {
      dst.weights.data()[k] += src.weights.data()[k];
    }
    for (std::size_t k = 0; k < dst.bias.size(); ++k) dst.bias[k] += src.bias[k];
  }
}

MlpParams init_mlp(const MlpSpec& spec, Rng& rng) {
  if (spec.input_dim == 0 || spec.output_dim == 0) {
    throw ConfigError("MLP input and output dims must be positive");
  }
  MlpParams params;
  params.output_activation = spec.output_activation;
  params.dropout_rate = spec.dropout_rate;
  std::vector<std::size_t> dims{spec.input_dim};
  dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
  dims.push_back(spec.output_dim);
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    if (dims[i + 1] == 0) throw ConfigError("MLP hidden width must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(dims[i]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    LayerParams layer{Matrix(dims[i + 1], dims[i]), std::vector<double>(dims[i + 1], 0.0)};
    for (double& w : layer.weights.data()) w = dist(rng);
    params.layers.push_back(std::move(layer));
  }
  params.validate();
  return params;
}

ForwardResult mlp_forward(const MlpParams& params, const Matrix& input,
                          bool training, Rng* rng) {
  params.validate();
  if (input.cols() != params.input_dim()) {
    throw ShapeError("mlp_forward: input has " + std::to_string(input.cols()) +
                     " columns, network expects " + std::to_string(params.input_dim()));
  }
  require_finite(input, "mlp_forward input");
  const bool use_dropout = training && params.dropout_rate > 0.0;
  if (use_dropout && rng == nullptr) {
    throw UsageError("mlp_forward: dropout in training mode requires an rng");
  }

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input = input;
  const std::size_t n_layers = params.layers.size();
  cache.pre_activations.reserve(n_layers);
  cache.activations.reserve(n_layers);
  cache.dropout_masks.resize(n_layers > 0 ? n_layers - 1 : 0);

  const double keep = 1.0 - params.dropout_rate;
  std::bernoulli_distribution keep_dist(keep);
  const Matrix* current = &input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    Matrix z = affine(*current, params.layers[l]);
    Matrix a = z;
    const bool hidden = l + 1 < n_layers;
    if (hidden) {
      for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
      if (use_dropout) {
        Matrix mask(a.rows(), a.cols());
        for (std::size_t k = 0; k < a.size(); ++k) {
          mask.data()[k] = keep_dist(*rng) ? 1.0 / keep : 0.0;
          a.data()[k] *= mask.data()[k];
        }
        cache.dropout_masks[l] = std::move(mask);
      }
    } else if (params.output_activation == OutputActivation::kSigmoid) {
      for (double& v : a.data()) v = sigmoid(v);
    }
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(std::move(a));
    current = &cache.activations.back();
  }
  result.output = cache.activations.back();
  require_finite(result.output, "mlp_forward output");
  return result;
}

BackwardResult mlp_backward(const MlpParams& params, const ForwardCache& cache,
                            const Matrix& output_grad, GradientOf wrt) {
  const std::size_t n_layers = params.layers.size();
  if (cache.pre_activations.size() != n_layers || cache.activations.size() != n_layers) {
    throw ShapeError("mlp_backward: cache does not match network depth");
  }
  const std::size_t batch = cache.input.rows();
  if (cache.input.cols() != params.input_dim()) {
    throw ShapeError("mlp_backward: cache input width does not match network");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& z = cache.pre_activations[l];
    if (z.rows() != batch || z.cols() != params.layers[l].out_dim()) {
      throw ShapeError("mlp_backward: cache layer " + std::to_string(l) +
                       " does not match params");
    }
  }
  if (output_grad.rows() != batch || output_grad.cols() != params.output_dim()) {
    throw ShapeError("mlp_backward: output_grad shape mismatch");
  }

  Matrix delta = output_grad;
  if (wrt == GradientOf::kOutput &&
      params.output_activation == OutputActivation::kSigmoid) {
    const auto& y = cache.activations.back();
    for (std::size_t k = 0; k < delta.size(); ++k) {
      const double p = y.data()[k];
      delta.data()[k] *= p * (1.0 - p);
    }
  }

  BackwardResult result;
  result.param_grads = zero_grads(params);
  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = params.layers[li];
    const Matrix& in = li == 0 ? cache.input : cache.activations[li - 1];
    auto& grad = result.param_grads.layers[li];
    const std::size_t n_in = layer.in_dim();
    const std::size_t n_out = layer.out_dim();
    for (std::size_t b = 0; b < batch; ++b) {
      const double* d = delta.row(b).data();
      const double* x = in.row(b).data();
      for (std::size_t o = 0; o < n_out; ++o) {
        const double g = d[o];
        if (g == 0.0) continue;
        grad.bias[o] += g;
        double* gw = grad.weights.row(o).data();
        for (std::size_t i = 0; i < n_in; ++i) gw[i] += g * x[i];
      }
    }
    Matrix upstream(batch, n_in);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* d = delta.row(b).data();
      double* u = upstream.row(b).data();
      for (std::size_t o = 0; o < n_out; ++o) {
        const double g = d[o];
        if (g == 0.0) continue;
        const double* w = layer.weights.row(o).data();
        for (std::size_t i = 0; i < n_in; ++i) u[i] += g * w[i];
      }
    }
    if (li > 0) {
      const auto& z_prev = cache.pre_activations[li - 1];
      const auto& mask = cache.dropout_masks[li - 1];
      for (std::size_t k = 0; k < upstream.size(); ++k) {
        double g = upstream.data()[k];
        if (!mask.empty()) g *= mask.data()[k];
        upstream.data()[k] = z_prev.data()[k] > 0.0 ? g : 0.0;
      }
    }
    delta = std::move(upstream);
  }
  result.input_grad = std::move(delta);
  return result;
}

}  // namespace hybridfl
