#include "evnet/transforms.hpp"

#include <string>

namespace evnet {

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::dft: return "dft";
    case TransformKind::haar: return "haar";
    case TransformKind::identity: return "identity";
  }
  return "dft";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "dft" || name == "DFT") return TransformKind::dft;
  if (name == "haar" || name == "Haar") return TransformKind::haar;
  if (name == "identity" || name == "Identity") return TransformKind::identity;
  throw std::invalid_argument("unknown transform '" + std::string(name) + "'");
}

SpectrumShape shape_map(TransformKind kind, int points, int dims) {
  if (points < 1 || dims < 1) throw std::invalid_argument("shape_map: sizes must be positive");
  switch (kind) {
    case TransformKind::dft: return {points, 2 * dims};
    case TransformKind::haar:
      if (points % 2 != 0) throw std::invalid_argument("shape_map: Haar needs an even point count");
      return {points / 2, 2 * dims};
    case TransformKind::identity: return {points, dims};
  }
  return {points, dims};
}

Spectrum forward_transform(TransformKind kind, const Trajectory& traj) {
  switch (kind) {
    case TransformKind::dft: return dft_forward(traj);
    case TransformKind::haar: return haar_forward(traj);
    case TransformKind::identity:
      require_finite(traj, "identity transform input");
      return traj;
  }
  return traj;
}

Trajectory inverse_transform(TransformKind kind, const Spectrum& spec) {
  switch (kind) {
    case TransformKind::dft: return dft_inverse(spec);
    case TransformKind::haar: return haar_inverse(spec);
    case TransformKind::identity: return spec;
  }
  return spec;
}

EnergyPair parseval_check(const Trajectory& traj, TransformKind kind) {
  EnergyPair out;
  if (traj.size() == 0) return out;
  out.time_energy = traj.squaredNorm();
  const Spectrum spec = forward_transform(kind, traj);
  if (kind == TransformKind::dft) {
    out.freq_energy = spec.leftCols(traj.cols()).squaredNorm();
  } else {
    out.freq_energy = spec.squaredNorm();
  }
  return out;
}

EnergyProfile energy_profile(const Trajectory& obs) {
  if (obs.rows() < 2) throw std::invalid_argument("energy_profile: need at least 2 observed steps");
  const Eigen::Index n = obs.rows();
  const Trajectory shifted = obs.rowwise() - obs.row(0);
  const Spectrum spec = dft_forward(shifted);

  EnergyProfile profile;
  profile.time_fractions = Eigen::VectorXd::Zero(n);
  profile.freq_fractions = Eigen::VectorXd::Zero(n);
  int used = 0;
  for (Eigen::Index c = 0; c < shifted.cols(); ++c) {
    const Eigen::VectorXd time_sq = shifted.col(c).array().square();
    const double total = time_sq.sum();
    if (!(total > 0.0)) continue;
    const Eigen::VectorXd freq_sq = spec.col(c).array().square();
    profile.time_fractions += time_sq / total;
    profile.freq_fractions += freq_sq / freq_sq.sum();
    ++used;
  }
  if (used == 0) {
    profile.degenerate = true;
    profile.time_fractions.setConstant(1.0 / double(n));
    profile.freq_fractions.setConstant(1.0 / double(n));
  } else {
    profile.time_fractions /= double(used);
    profile.freq_fractions /= double(used);
  }
  return profile;
}

}  // namespace evnet
