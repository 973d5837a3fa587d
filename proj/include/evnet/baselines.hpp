#pragma once

// Closed-form predictors used as references: per-dimension linear least
// squares over the observed steps, and zero velocity.

#include "evnet/trajectory.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace evnet {

/// Per-dimension line x_m(t) = b_m + w_m t over 1-based step indices.
template <typename Scalar>
struct LinearFitT {
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> intercept;  // b_m
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> slope;      // w_m
};
using LinearFit = LinearFitT<double>;

/// Normal-equations solution x_m = (A_h^T A_h)^{-1} A_h^T X_m with A_h rows
/// (1, t), t = 1..t_h. The 2x2 system is inverted in closed form.
template <typename Derived>
LinearFitT<typename Derived::Scalar> lls_fit(const Eigen::MatrixBase<Derived>& obs) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = obs.rows();
  if (n < 2) throw std::invalid_argument("lls_fit: need at least 2 observed steps");
  // A^T A = [[n, S1], [S1, S2]] with S1 = sum t, S2 = sum t^2.
  const Scalar nn = Scalar(n);
  const Scalar s1 = nn * (nn + 1) / 2;
  const Scalar s2 = nn * (nn + 1) * (2 * nn + 1) / 6;
  const Scalar det = nn * s2 - s1 * s1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = Scalar(i + 1);
  // A^T X: column sums and time-weighted sums.
  const auto sum_x = obs.colwise().sum();
  const auto sum_tx = t.transpose() * obs;
  LinearFitT<Scalar> fit;
  fit.intercept = (s2 * sum_x - s1 * sum_tx) / det;
  fit.slope = (nn * sum_tx - s1 * sum_x) / det;
  return fit;
}

/// A_f x_m for t = t_h + 1 .. t_h + t_f.
template <typename Scalar>
TrajectoryT<Scalar> lls_predict(const LinearFitT<Scalar>& fit, int obs_steps, int pred_steps) {
  TrajectoryT<Scalar> out(pred_steps, fit.intercept.size());
  for (int i = 0; i < pred_steps; ++i) out.row(i) = fit.intercept + Scalar(obs_steps + i + 1) * fit.slope;
  return out;
}

template <typename Derived>
TrajectoryT<typename Derived::Scalar> lls_fit_predict(const Eigen::MatrixBase<Derived>& obs, int pred_steps) {
  return lls_predict(lls_fit(obs), static_cast<int>(obs.rows()), pred_steps);
}

/// Every future row repeats the last observation.
template <typename Derived>
TrajectoryT<typename Derived::Scalar> zero_vel_predict(const Eigen::MatrixBase<Derived>& obs, int pred_steps) {
  if (obs.rows() < 1) throw std::invalid_argument("zero_vel_predict: empty observation");
  return obs.row(obs.rows() - 1).replicate(pred_steps, 1);
}

}  // namespace evnet
