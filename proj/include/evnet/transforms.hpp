#pragma once

#include "evnet/trajectory.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <utility>

namespace evnet {

/// Per-dimension spectrum of a trajectory. For the DFT, columns [0, M) hold
/// amplitudes and [M, 2M) phases; for Haar, approximation then detail
/// coefficients.
template <typename Scalar>
using SpectrumT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Spectrum = SpectrumT<double>;

enum class TransformKind { dft, haar, identity };

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

struct SpectrumShape {
  int points = 0;  // 𝒩
  int dims = 0;    // ℳ
  friend bool operator==(const SpectrumShape&, const SpectrumShape&) = default;
};

/// Shape maps f_(T,n), f_(T,m). Haar requires an even point count.
SpectrumShape shape_map(TransformKind kind, int points, int dims);

namespace detail {

template <typename Scalar>
Scalar phase_of(Scalar re, Scalar im, Scalar amplitude, Scalar zero_tol) {
  if (amplitude <= zero_tol) return Scalar(0);
  Scalar phi = std::atan2(im, re);
  // atan2 yields -pi for (negative, -0.0); fold onto the half-open range.
  if (phi <= -std::numbers::pi_v<Scalar>) phi = std::numbers::pi_v<Scalar>;
  return phi;
}

}  // namespace detail

/// Unitary DFT applied independently to every column. Amplitudes are |c(n)|
/// and phases arg c(n) in (-pi, pi]; bins with vanishing amplitude get
/// phase 0.
template <typename Derived>
SpectrumT<typename Derived::Scalar> dft_forward(const Eigen::MatrixBase<Derived>& traj) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = traj.rows();
  const Eigen::Index m = traj.cols();
  if (n < 1) throw std::invalid_argument("dft_forward: empty trajectory");
  if (!traj.allFinite()) throw std::invalid_argument("dft_forward: non-finite input");

  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar norm = Scalar(1) / std::sqrt(Scalar(n));
  // Real and imaginary parts as two real matrix products.
  SpectrumT<Scalar> cosines(n, n), sines(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index t = 0; t < n; ++t) {
      const Scalar angle = two_pi * Scalar((k * t) % n) / Scalar(n);
      cosines(k, t) = std::cos(angle);
      sines(k, t) = -std::sin(angle);
    }
  }
  const SpectrumT<Scalar> re = norm * (cosines * traj);
  const SpectrumT<Scalar> im = norm * (sines * traj);

  const Scalar zero_tol =
      Scalar(1e-12) * (Scalar(1) + traj.cwiseAbs().maxCoeff() * std::sqrt(Scalar(n)));
  SpectrumT<Scalar> out(n, 2 * m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const Scalar amp = std::hypot(re(k, c), im(k, c));
      out(k, c) = amp;
      out(k, m + c) = detail::phase_of(re(k, c), im(k, c), amp, zero_tol);
    }
  }
  return out;
}

/// Inverse of dft_forward. The real part of the reconstruction is returned;
/// the largest discarded imaginary magnitude is stored in `imag_residue`.
template <typename Derived>
TrajectoryT<typename Derived::Scalar> dft_inverse(const Eigen::MatrixBase<Derived>& spec,
                                                  typename Derived::Scalar* imag_residue = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (spec.cols() % 2 != 0) throw std::invalid_argument("dft_inverse: spectrum width must be even");
  if (!spec.allFinite()) throw std::invalid_argument("dft_inverse: non-finite spectrum");
  const Eigen::Index n = spec.rows();
  const Eigen::Index m = spec.cols() / 2;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  const Scalar norm = n > 0 ? Scalar(1) / std::sqrt(Scalar(n)) : Scalar(0);

  TrajectoryT<Scalar> out = TrajectoryT<Scalar>::Zero(n, m);
  Scalar residue = 0;
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index t = 0; t < n; ++t) {
      Scalar re = 0, im = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const Scalar angle = spec(k, m + c) + two_pi * Scalar((k * t) % n) / Scalar(n);
        re += spec(k, c) * std::cos(angle);
        im += spec(k, c) * std::sin(angle);
      }
      out(t, c) = norm * re;
      residue = std::max(residue, std::abs(norm * im));
    }
  }
  if (imag_residue) *imag_residue = residue;
  return out;
}

/// Orthonormal single-level Haar transform per column.
template <typename Derived>
SpectrumT<typename Derived::Scalar> haar_forward(const Eigen::MatrixBase<Derived>& traj) {
  using Scalar = typename Derived::Scalar;
  if (traj.rows() % 2 != 0 || traj.rows() == 0)
    throw std::invalid_argument("haar_forward: point count must be even and positive");
  if (!traj.allFinite()) throw std::invalid_argument("haar_forward: non-finite input");
  const Eigen::Index half = traj.rows() / 2;
  const Eigen::Index m = traj.cols();
  const Scalar inv_sqrt2 = Scalar(1) / std::numbers::sqrt2_v<Scalar>;
  SpectrumT<Scalar> out(half, 2 * m);
  for (Eigen::Index k = 0; k < half; ++k) {
    const auto even = traj.row(2 * k);
    const auto odd = traj.row(2 * k + 1);
    out.row(k).head(m) = (even + odd) * inv_sqrt2;
    out.row(k).tail(m) = (even - odd) * inv_sqrt2;
  }
  return out;
}

template <typename Derived>
TrajectoryT<typename Derived::Scalar> haar_inverse(const Eigen::MatrixBase<Derived>& spec) {
  using Scalar = typename Derived::Scalar;
  if (spec.cols() % 2 != 0) throw std::invalid_argument("haar_inverse: spectrum width must be even");
  if (!spec.allFinite()) throw std::invalid_argument("haar_inverse: non-finite spectrum");
  const Eigen::Index half = spec.rows();
  const Eigen::Index m = spec.cols() / 2;
  const Scalar inv_sqrt2 = Scalar(1) / std::numbers::sqrt2_v<Scalar>;
  TrajectoryT<Scalar> out(2 * half, m);
  for (Eigen::Index k = 0; k < half; ++k) {
    const auto approx = spec.row(k).head(m);
    const auto det = spec.row(k).tail(m);
    out.row(2 * k) = (approx + det) * inv_sqrt2;
    out.row(2 * k + 1) = (approx - det) * inv_sqrt2;
  }
  return out;
}

Spectrum forward_transform(TransformKind kind, const Trajectory& traj);
Trajectory inverse_transform(TransformKind kind, const Spectrum& spec);

struct EnergyPair {
  double time_energy = 0.0;
  double freq_energy = 0.0;
};

/// Energy of the trajectory in both domains. For the DFT only the amplitude
/// columns carry energy; for Haar every coefficient does.
EnergyPair parseval_check(const Trajectory& traj, TransformKind kind = TransformKind::dft);

struct EnergyProfile {
  Eigen::VectorXd time_fractions;  // t_h entries
  Eigen::VectorXd freq_fractions;  // 𝒩_h entries (DFT bins)
  bool degenerate = false;         // shifted trajectory was identically zero
};

/// Percentage energy per step and per DFT bin after shifting the first
/// observed point to the origin. Dimensions with zero energy are skipped;
/// if all are zero the profile is uniform and flagged degenerate.
EnergyProfile energy_profile(const Trajectory& obs);

}  // namespace evnet
