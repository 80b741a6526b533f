#pragma once

// Reference implementations used only by the tests. Deliberately naive:
// nested loops over std::vector, no shared code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, Mat[r][c]

struct Layer {
  Mat w;  // [out][in]
  Vec b;
};

struct Net {
  std::vector<Layer> layers;
  bool sigmoid_out = false;
};

inline double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Per-sample forward; returns every layer's pre-activation and output.
struct Trace {
  std::vector<Vec> z;
  std::vector<Vec> a;  // a[0] = input
};

inline Trace forward(const Net& net, const Vec& x) {
  Trace t;
  t.a.push_back(x);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Layer& L = net.layers[l];
    Vec z(L.b);
    for (std::size_t o = 0; o < L.w.size(); ++o)
      for (std::size_t i = 0; i < L.w[o].size(); ++i) z[o] += L.w[o][i] * t.a.back()[i];
    Vec a(z);
    const bool last = l + 1 == net.layers.size();
    for (auto& v : a) {
      if (!last) v = v > 0.0 ? v : 0.0;
      else if (net.sigmoid_out) v = sig(v);
    }
    t.z.push_back(z);
    t.a.push_back(a);
  }
  return t;
}

inline Vec output(const Net& net, const Vec& x) { return forward(net, x).a.back(); }

// Gradient accumulator with the net's layout.
struct Grad {
  std::vector<Layer> layers;
};

inline Grad zeros_like(const Net& net) {
  Grad g;
  for (const auto& L : net.layers) {
    Layer z;
    z.w.assign(L.w.size(), Vec(L.w.empty() ? 0 : L.w[0].size(), 0.0));
    z.b.assign(L.b.size(), 0.0);
    g.layers.push_back(z);
  }
  return g;
}

// Backprop of one sample. `d_last` is the gradient w.r.t. the last layer's
// pre-activation (logit) when the output is a sigmoid that the loss already
// folded in, otherwise w.r.t. the output. Returns the input gradient.
inline Vec backward(const Net& net, const Trace& t, Vec d_last, Grad& g) {
  Vec delta = std::move(d_last);
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const Layer& L = net.layers[l];
    if (l + 1 != net.layers.size()) {
      for (std::size_t o = 0; o < delta.size(); ++o)
        if (!(t.z[l][o] > 0.0)) delta[o] = 0.0;
    }
    for (std::size_t o = 0; o < L.w.size(); ++o) {
      g.layers[l].b[o] += delta[o];
      for (std::size_t i = 0; i < L.w[o].size(); ++i) g.layers[l].w[o][i] += delta[o] * t.a[l][i];
    }
    Vec prev(L.w.empty() ? 0 : L.w[0].size(), 0.0);
    for (std::size_t o = 0; o < L.w.size(); ++o)
      for (std::size_t i = 0; i < prev.size(); ++i) prev[i] += L.w[o][i] * delta[o];
    delta = std::move(prev);
  }
  return delta;
}

inline void sgd(Net& net, const Grad& g, double lr) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t o = 0; o < net.layers[l].w.size(); ++o) {
      net.layers[l].b[o] -= lr * g.layers[l].b[o];
      for (std::size_t i = 0; i < net.layers[l].w[o].size(); ++i)
        net.layers[l].w[o][i] -= lr * g.layers[l].w[o][i];
    }
  }
}

constexpr double kClamp = 1e-7;

inline double clampp(double p) { return std::min(std::max(p, kClamp), 1.0 - kClamp); }

inline double bce(double p, int y) {
  p = clampp(p);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

// d bce / d logit, unclamped region.
inline double bce_dz(double p, int y) { return p - y; }

inline double focal(double p, int y, double alpha, double gamma) {
  p = clampp(p);
  const double pt = y == 1 ? p : 1.0 - p;
  const double at = y == 1 ? alpha : 1.0 - alpha;
  return -at * std::pow(1.0 - pt, gamma) * std::log(pt);
}

// Hand-derived d focal / d logit (sigmoid output), unclamped region.
inline double focal_dz(double p, int y, double alpha, double gamma) {
  if (y == 1) {
    return alpha * gamma * p * std::pow(1.0 - p, gamma) * std::log(p) -
           alpha * std::pow(1.0 - p, gamma + 1.0);
  }
  const double q = 1.0 - p;
  return (1.0 - alpha) * std::pow(p, gamma + 1.0) -
         (1.0 - alpha) * gamma * q * std::pow(p, gamma) * std::log(q);
}

// Textbook Adam on a flat parameter vector.
struct Adam {
  double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Vec m, v;
  long t = 0;

  void step(Vec& p, const Vec& g, double lr) {
    if (m.empty()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    ++t;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1 - b1) * g[k];
      v[k] = b2 * v[k] + (1 - b2) * g[k] * g[k];
      const double mh = m[k] / (1 - std::pow(b1, static_cast<double>(t)));
      const double vh = v[k] / (1 - std::pow(b2, static_cast<double>(t)));
      p[k] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

// Brute-force average precision: for each distinct score s (descending),
// predict positive for every score >= s, then sum (R_k - R_{k-1}) * P_k.
inline double average_precision(const Vec& scores, const std::vector<int>& labels) {
  Vec distinct(scores);
  std::sort(distinct.begin(), distinct.end(), std::greater<>());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  double ap = 0.0, prev_recall = 0.0;
  for (double s : distinct) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= s) (labels[i] == 1 ? tp : fp) += 1;
    }
    const double recall = tp / pos;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
  }
  return ap;
}

// Central difference of f at x along coordinate k.
inline double central_diff(const std::function<double(const Vec&)>& f, Vec x, std::size_t k,
                           double h = 1e-6) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double up = f(x);
  x[k] = x0 - h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
