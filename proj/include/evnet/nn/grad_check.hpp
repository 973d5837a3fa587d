#pragma once

#include "evnet/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace evnet::nn {

/// Largest |analytic - numeric| / (|analytic| + |numeric| + 1e-12) over the
/// checked coordinates, using central differences with step h.
inline double grad_check(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd theta,
                         const Eigen::VectorXd& analytic, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check: step must be positive");
  if (analytic.size() != theta.size()) throw std::invalid_argument("grad_check: gradient size mismatch");
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = theta(i);
    theta(i) = saved + h;
    const double up = f(theta);
    theta(i) = saved - h;
    const double down = f(theta);
    theta(i) = saved;
    const double numeric = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic(i) - numeric) / (std::abs(analytic(i)) + std::abs(numeric) + 1e-12));
  }
  return worst;
}

struct ParamCheckOptions {
  double step = 1e-6;
  /// Coordinates checked per tensor; tensors larger than this are probed at
  /// evenly spaced entries. Zero checks everything.
  Eigen::Index max_per_tensor = 0;
};

/// Same check over named parameters, reported per tensor as
/// |analytic - numeric| / (|analytic| + |numeric|) over the probed entries
/// (Euclidean norms), so entries whose gradient sits at the round-off floor
/// do not dominate. `loss` is evaluated on perturbed copies of `params`;
/// `analytic` holds the reverse-mode gradients. Returns the worst tensor.
inline double grad_check(const std::function<double(const ParamStore&)>& loss, ParamStore params,
                         const Gradients& analytic, const ParamCheckOptions& opts = {},
                         std::string* worst_tensor = nullptr) {
  double worst = 0.0;
  for (auto& [name, tensor] : params.tensors()) {
    auto g_it = analytic.find(name);
    const Eigen::Index n = tensor.size();
    Eigen::Index stride = 1;
    if (opts.max_per_tensor > 0 && n > opts.max_per_tensor) stride = (n + opts.max_per_tensor - 1) / opts.max_per_tensor;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (Eigen::Index i = 0; i < n; i += stride) {
      double& x = tensor.data()[i];
      const double saved = x;
      x = saved + opts.step;
      const double up = loss(params);
      x = saved - opts.step;
      const double down = loss(params);
      x = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = g_it == analytic.end() ? 0.0 : g_it->second.data()[i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double err = std::sqrt(diff2) / (std::sqrt(a2) + std::sqrt(n2) + 1e-12);
    if (err > worst) {
      worst = err;
      if (worst_tensor) *worst_tensor = name;
    }
  }
  return worst;
}

}  // namespace evnet::nn
