#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hybridfl/mlp.hpp"
#include "oracle.hpp"

namespace testsupport {

inline oracle::Net to_oracle(const hybridfl::MlpParams& p) {
  oracle::Net n;
  n.sigmoid_out = p.output_activation == hybridfl::OutputActivation::kSigmoid;
  for (const auto& L : p.layers) {
    oracle::Layer o;
    o.b = L.bias;
    o.w.assign(L.out_dim(), oracle::Vec(L.in_dim()));
    for (std::size_t r = 0; r < L.out_dim(); ++r)
      for (std::size_t c = 0; c < L.in_dim(); ++c) o.w[r][c] = L.weights(r, c);
    n.layers.push_back(o);
  }
  return n;
}

// Weights then bias, layer by layer.
inline std::vector<double> flatten(const std::vector<hybridfl::LayerParams>& layers) {
  std::vector<double> v;
  for (const auto& L : layers) {
    v.insert(v.end(), L.weights.data().begin(), L.weights.data().end());
    v.insert(v.end(), L.bias.begin(), L.bias.end());
  }
  return v;
}

inline std::vector<double> flatten(const oracle::Net& n) {
  std::vector<double> v;
  for (const auto& L : n.layers) {
    for (const auto& row : L.w) v.insert(v.end(), row.begin(), row.end());
    v.insert(v.end(), L.b.begin(), L.b.end());
  }
  return v;
}

inline std::vector<double> flatten(const oracle::Grad& g) {
  std::vector<double> v;
  for (const auto& L : g.layers) {
    for (const auto& row : L.w) v.insert(v.end(), row.begin(), row.end());
    v.insert(v.end(), L.b.begin(), L.b.end());
  }
  return v;
}

inline void unflatten(const std::vector<double>& v, hybridfl::MlpParams& p) {
  std::size_t k = 0;
  for (auto& L : p.layers) {
    for (auto& w : L.weights.data()) w = v[k++];
    for (auto& b : L.bias) b = v[k++];
  }
}

inline hybridfl::Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed,
                                      double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  hybridfl::Matrix m(r, c);
  for (auto& x : m.data()) x = d(rng);
  return m;
}

inline hybridfl::MlpParams random_mlp(std::size_t in, std::vector<std::size_t> hidden,
                                      std::size_t out, hybridfl::OutputActivation act,
                                      std::uint64_t seed) {
  hybridfl::Rng rng(seed);
  auto p = hybridfl::init_mlp({in, std::move(hidden), out, act, 0.0}, rng);
  // Non-zero biases so ReLU kinks and bias gradients are exercised.
  std::mt19937_64 r2(seed ^ 0x5bd1e995ULL);
  std::normal_distribution<double> d(0.0, 0.1);
  for (auto& L : p.layers)
    for (auto& b : L.bias) b = d(r2);
  return p;
}

inline oracle::Vec row_of(const hybridfl::Matrix& m, std::size_t r) {
  auto s = m.row(r);
  return {s.begin(), s.end()};
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("hybridfl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
