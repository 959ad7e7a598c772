#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "deepcent/nn.hpp"

namespace testutil {

// Pointers to every trainable coefficient of a network, layer by layer,
// weights (column-major storage order) then bias.
inline std::vector<double*> parameters(deepcent::nn::Mlp& net) {
  std::vector<double*> out;
  for (auto& layer : net.layers()) {
    for (Eigen::Index k = 0; k < layer.weights.size(); ++k) {
      out.push_back(layer.weights.data() + k);
    }
    for (Eigen::Index k = 0; k < layer.bias.size(); ++k) {
      out.push_back(layer.bias.data() + k);
    }
  }
  return out;
}

// Central finite difference of f at *param.
inline double fd_gradient(const std::function<double()>& f, double* param,
                          double h = 1e-5) {
  const double orig = *param;
  *param = orig + h;
  const double up = f();
  *param = orig - h;
  const double down = f();
  *param = orig;
  return (up - down) / (2.0 * h);
}

// |a - b| / max(1, |a|, |b|): relative for large gradients, absolute near 0.
inline double grad_error(double analytic, double numeric) {
  return std::fabs(analytic - numeric) /
         std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
}

// Max mismatch between an analytic gradient list (same order as
// parameters()) and central finite differences of f.
inline double max_gradient_error(deepcent::nn::Mlp& net,
                                 const deepcent::nn::Gradients& analytic,
                                 const std::function<double()>& f, double h = 1e-5) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < analytic.d_weights.size(); ++l) {
    flat.insert(flat.end(), analytic.d_weights[l].data(),
                analytic.d_weights[l].data() + analytic.d_weights[l].size());
    flat.insert(flat.end(), analytic.d_bias[l].data(),
                analytic.d_bias[l].data() + analytic.d_bias[l].size());
  }
  const std::vector<double*> params = parameters(net);
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    worst = std::max(worst, grad_error(flat[k], fd_gradient(f, params[k], h)));
  }
  return worst;
}

// Smallest |pre-activation| over all ReLU layers of a cached forward pass;
// used to resample test points away from kinks.
inline double min_relu_margin(const deepcent::nn::Mlp& net,
                              const deepcent::nn::ForwardCache& cache) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    if (net.layers()[l].activation != deepcent::nn::Activation::relu) continue;
    margin = std::min(margin, cache.pre_activation[l].array().abs().minCoeff());
  }
  return margin;
}

// Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace testutil
