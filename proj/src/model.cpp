#include "evnet/model.hpp"

#include "evnet/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace evnet {

using nn::Activation;
using nn::Matrix;
using nn::Tape;
using nn::Var;

std::string_view to_string(InterpolationMode mode) {
  return mode == InterpolationMode::linear ? "linear" : "network";
}

InterpolationMode parse_interpolation_mode(std::string_view name) {
  if (name == "network") return InterpolationMode::network;
  if (name == "linear") return InterpolationMode::linear;
  throw std::invalid_argument("unknown interpolation mode '" + std::string(name) + "'");
}

std::string_view to_string(nn::CrossAttentionOrder order) {
  return order == nn::CrossAttentionOrder::conventional ? "conventional" : "as_printed";
}

nn::CrossAttentionOrder parse_cross_attention_order(std::string_view name) {
  if (name == "as_printed") return nn::CrossAttentionOrder::as_printed;
  if (name == "conventional") return nn::CrossAttentionOrder::conventional;
  throw std::invalid_argument("unknown cross attention order '" + std::string(name) + "'");
}

KeypointSchedule default_keypoints(TransformKind transform, int obs_steps, int pred_steps) {
  if (pred_steps < 1) throw std::invalid_argument("default_keypoints: t_f must be positive");
  if (obs_steps == 8 && pred_steps == 12) {
    if (transform == TransformKind::haar) return {{obs_steps + 3, obs_steps + 6, obs_steps + 9, obs_steps + 12}};
    return {{obs_steps + 4, obs_steps + 8, obs_steps + 12}};
  }
  if (obs_steps == 4 && pred_steps == 4) return {{obs_steps + 2, obs_steps + 4}};

  int count = transform == TransformKind::haar ? std::min(4, pred_steps - pred_steps % 2) : std::min(3, pred_steps);
  if (count < 1) count = 1;
  KeypointSchedule out;
  for (int i = 1; i <= count; ++i) {
    const int offset = static_cast<int>(std::lround(double(pred_steps) * i / count));
    if (out.times.empty() || obs_steps + offset > out.times.back()) out.times.push_back(obs_steps + offset);
  }
  return out;
}

void ModelConfig::validate() const {
  task.validate();
  keypoints.validate(task);
  if (width < 2 || width % 2 != 0) throw std::invalid_argument("model width must be even");
  if (use_bilinear && embed_width() % 2 != 0)
    throw std::invalid_argument("bilinear pooling needs an even embedding width");
  transformer().validate();
  if (noise_dim < 1 || context_dim < 1) throw std::invalid_argument("noise and context widths must be positive");
  if (transform == TransformKind::haar) {
    if (task.obs_steps % 2 != 0 || task.total_steps() % 2 != 0)
      throw std::invalid_argument("Haar transform needs even t_h and t_h + t_f");
    if (keypoints.count() % 2 != 0) throw std::invalid_argument("Haar transform needs an even keypoint count");
  }
}

bool is_keypoint_stage(std::string_view name) { return name.starts_with("key."); }

ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto rng = substream(seed, "init");
  const int d = cfg.width;
  const int e = cfg.embed_width();
  const auto obs = cfg.obs_shape();
  const auto key = cfg.key_shape();
  const auto tcfg = cfg.transformer();

  ModelParams p;
  nn::init_dense(p, "key.mlp_t", obs.dims, e, rng);
  nn::init_dense(p, "key.mlp_i", cfg.noise_dim, e, rng);
  if (cfg.use_bilinear) nn::init_dense(p, "key.mlp_bi", (e / 2) * (e / 2), e, rng);
  nn::init_dense(p, "key.query", obs.dims, d, rng);
  nn::init_transformer(p, "key.T", tcfg, rng);
  nn::init_dense(p, "key.mlp_e", d, d, rng);
  nn::init_dense(p, "key.mlp_d", obs.points * d, key.points * key.dims, rng);

  nn::init_dense(p, "interp.mlp_t", key.dims, e, rng);
  nn::init_dense(p, "interp.mlp_c", cfg.context_dim, e, rng);
  nn::init_dense(p, "interp.fuse", 2 * e, d, rng);
  nn::init_dense(p, "interp.query", key.dims, d, rng);
  nn::init_transformer(p, "interp.T", tcfg, rng);
  nn::init_dense(p, "interp.out", d, key.dims, rng);
  return p;
}

Var bilinear_fuse(Tape& tape, const ModelParams& p, const std::string& prefix, Var features) {
  Var pooled = nn::bilinear_pool(features);
  return nn::dense(tape, p, prefix, pooled, Activation::relu);
}

std::vector<Matrix> bilinear_outer_products(const Matrix& features) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index n = 0; n < features.rows(); ++n) out.push_back(features.row(n).transpose() * features.row(n));
  return out;
}

Var embed_observation(Tape& tape, const ModelParams& p, const ModelConfig& cfg, Var spectrum, Var noise) {
  const auto obs = cfg.obs_shape();
  if (spectrum.rows() != obs.points || spectrum.cols() != obs.dims)
    throw std::invalid_argument("embed_observation: spectrum shape does not match the model");
  if (noise.rows() != 1 || noise.cols() != cfg.noise_dim)
    throw std::invalid_argument("embed_observation: noise width does not match the model");
  Var ft = nn::dense(tape, p, "key.mlp_t", spectrum, Activation::relu);
  if (cfg.use_bilinear) ft = bilinear_fuse(tape, p, "key.mlp_bi", ft);
  Var fi = nn::dense(tape, p, "key.mlp_i", nn::tile_rows(noise, obs.points), Activation::relu);
  return nn::concat_cols({ft, fi});
}

Var keypoints_subnet(Tape& tape, const ModelParams& p, const ModelConfig& cfg, Var spectrum, Var noise) {
  const auto key = cfg.key_shape();
  Var fe = embed_observation(tape, p, cfg, spectrum, noise);
  Var query = nn::dense(tape, p, "key.query", spectrum);
  Var behavior = nn::transformer(tape, p, "key.T", fe, query, cfg.transformer());
  Var f = nn::dense(tape, p, "key.mlp_e", behavior, Activation::relu);
  Var flat = nn::dense(tape, p, "key.mlp_d", nn::flatten(f));
  return nn::reshape(flat, key.points, key.dims);
}

Var keypoints_to_spatial(Var keypoint_spectrum, TransformKind transform) {
  switch (transform) {
    case TransformKind::dft: return nn::idft_amp_phase(keypoint_spectrum);
    case TransformKind::haar: return nn::haar_inverse(keypoint_spectrum);
    case TransformKind::identity: return keypoint_spectrum;
  }
  return keypoint_spectrum;
}

Matrix interpolation_matrix(int n_in, int n_out) {
  if (n_in < 1 || n_out < n_in) throw std::invalid_argument("interpolation_matrix: need 1 <= n_in <= n_out");
  Matrix w = Matrix::Zero(n_out, n_in);
  if (n_in == 1) {
    w.setOnes();
    return w;
  }
  for (int j = 0; j < n_out; ++j) {
    const double u = n_out == 1 ? 0.0 : double(j) * double(n_in - 1) / double(n_out - 1);
    int lo = static_cast<int>(std::floor(u));
    if (lo >= n_in - 1) lo = n_in - 2;
    const double frac = u - lo;
    w(j, lo) = 1.0 - frac;
    w(j, lo + 1) = frac;
  }
  return w;
}

Spectrum interp_keypoint_spectrum(const Spectrum& keypoint_spectrum, int n_out) {
  return interpolation_matrix(static_cast<int>(keypoint_spectrum.rows()), n_out) * keypoint_spectrum;
}

Var interpolation_subnet(Tape& tape, const ModelParams& p, const ModelConfig& cfg, Var keypoint_spectrum,
                         const ContextFeature& ctx) {
  const auto key = cfg.key_shape();
  const auto full = cfg.full_shape();
  if (keypoint_spectrum.rows() != key.points || keypoint_spectrum.cols() != key.dims)
    throw std::invalid_argument("interpolation_subnet: keypoint spectrum shape does not match the model");
  const Matrix resample = interpolation_matrix(key.points, full.points);
  Var interpolated = nn::left_multiply(resample, keypoint_spectrum);
  if (cfg.interpolation == InterpolationMode::linear) return interpolated;

  if (ctx.values.size() != cfg.context_dim)
    throw std::invalid_argument("interpolation_subnet: context width does not match the model");
  Var ft_key = nn::dense(tape, p, "interp.mlp_t", keypoint_spectrum, Activation::relu);
  Var ft_interp = nn::left_multiply(resample, ft_key);
  Var fc = nn::dense(tape, p, "interp.mlp_c", tape.constant(ctx.values), Activation::relu);
  Var fused = nn::dense(tape, p, "interp.fuse", nn::concat_cols({ft_interp, nn::tile_rows(fc, full.points)}));
  Var query = nn::dense(tape, p, "interp.query", interpolated);
  Var features = nn::transformer(tape, p, "interp.T", fused, query, cfg.transformer());
  return nn::dense(tape, p, "interp.out", features);
}

Var spectrum_to_future(Var full_spectrum, const ModelConfig& cfg) {
  Var traj = keypoints_to_spatial(full_spectrum, cfg.transform);
  return nn::slice_rows(traj, cfg.task.obs_steps, cfg.task.pred_steps);
}

std::vector<Eigen::RowVectorXd> draw_noise(const ModelConfig& cfg, int count, std::uint64_t seed) {
  auto rng = substream(seed, "noise");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::RowVectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Eigen::RowVectorXd z(cfg.noise_dim);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    out.push_back(std::move(z));
  }
  return out;
}

PredictionSet evnet_forward(const Trajectory& obs, const ContextFeature& ctx, const ModelParams& p,
                            const ModelConfig& cfg, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("evnet_forward: need at least one sample");
  if (obs.rows() != cfg.task.obs_steps || obs.cols() != cfg.dims())
    throw std::invalid_argument("evnet_forward: observation shape does not match the task");
  cfg.validate();

  const Spectrum spectrum = forward_transform(cfg.transform, obs);
  const auto noise = draw_noise(cfg, samples, seed);
  PredictionSet out;
  for (int k = 0; k < samples; ++k) {
    Tape tape(false);
    Var s = tape.constant(spectrum);
    Var kspec = keypoints_subnet(tape, p, cfg, s, tape.constant(noise[k]));
    Var spatial = keypoints_to_spatial(kspec, cfg.transform);
    Var full = interpolation_subnet(tape, p, cfg, kspec, ctx);
    out.keypoint_spectra.push_back(kspec.value());
    out.spatial_keypoints.push_back(spatial.value());
    out.full_spectra.push_back(full.value());
    const Trajectory reconstructed = inverse_transform(cfg.transform, out.full_spectra.back());
    out.samples.push_back(reconstructed.bottomRows(cfg.task.pred_steps));
  }
  return out;
}

namespace {

Spectrum merge_spectra(const Spectrum& a, const Spectrum& b) {
  const Eigen::Index half = a.cols() / 2;
  Spectrum out(a.rows(), 2 * a.cols());
  out << a.leftCols(half), b.leftCols(half), a.rightCols(half), b.rightCols(half);
  return out;
}

}  // namespace

PredictionSet co2bb_predict(const Trajectory& obs_box, const ContextFeature& ctx, const ModelParams& p,
                            const ModelConfig& cfg, int samples, std::uint64_t seed) {
  if (cfg.dims() != 2) throw std::invalid_argument("co2bb prediction needs a 2-D coordinate model");
  if (obs_box.cols() != 4) throw std::invalid_argument("co2bb prediction needs a 4-column box trajectory");
  const auto corners = split_box_to_points(obs_box);
  const PredictionSet a = evnet_forward(corners[0], ctx, p, cfg, samples, seed);
  const PredictionSet b = evnet_forward(corners[1], ctx, p, cfg, samples, seed);
  PredictionSet out;
  for (int k = 0; k < samples; ++k) {
    out.samples.push_back(merge_points_to_box(a.samples[k], b.samples[k]));
    out.spatial_keypoints.push_back(merge_points_to_box(a.spatial_keypoints[k], b.spatial_keypoints[k]));
    if (cfg.transform == TransformKind::identity) {
      out.keypoint_spectra.push_back(merge_points_to_box(a.keypoint_spectra[k], b.keypoint_spectra[k]));
      out.full_spectra.push_back(merge_points_to_box(a.full_spectra[k], b.full_spectra[k]));
    } else {
      out.keypoint_spectra.push_back(merge_spectra(a.keypoint_spectra[k], b.keypoint_spectra[k]));
      out.full_spectra.push_back(merge_spectra(a.full_spectra[k], b.full_spectra[k]));
    }
  }
  return out;
}

}  // namespace evnet
