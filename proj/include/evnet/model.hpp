#pragma once

// Two-stage keypoints/interpolation predictor working on trajectory
// spectra.
//
// Stage 1 (parameters under "key."): the observed spectrum is embedded,
// optionally through the bilinear outer-product structure, concatenated
// with an embedded noise vector, passed through an encoder/decoder
// transformer queried by the spectrum itself, and decoded into an
// N_key-point keypoint spectrum.
//
// Stage 2 (parameters under "interp."): the keypoint spectrum is linearly
// resampled to the full horizon, fused with the context feature, and
// refined by a second transformer into the complete spectrum. The inverse
// transform of that spectrum, sliced to the future rows, is the prediction.

#include "evnet/nn/layers.hpp"
#include "evnet/nn/tape.hpp"
#include "evnet/trajectory.hpp"
#include "evnet/transforms.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evnet {

enum class InterpolationMode { network, linear };

std::string_view to_string(InterpolationMode mode);
InterpolationMode parse_interpolation_mode(std::string_view name);
std::string_view to_string(nn::CrossAttentionOrder order);
nn::CrossAttentionOrder parse_cross_attention_order(std::string_view name);

/// Keypoint times used for each horizon: {+4,+8,+12} (DFT) and
/// {+3,+6,+9,+12} (Haar) for 8/12, {+2,+4} for 4/4, otherwise evenly
/// spaced with the last keypoint on the final step.
KeypointSchedule default_keypoints(TransformKind transform, int obs_steps, int pred_steps);

struct ModelConfig {
  TransformKind transform = TransformKind::dft;
  PredictionTask task;
  KeypointSchedule keypoints{{12, 16, 20}};
  int width = 128;         // d
  int heads = 8;           // H
  int layers = 4;          // L
  int hidden = 512;        // first layer of MLP_e / MLP_d inside the transformers
  int noise_dim = 128;
  int context_dim = 64;
  bool use_bilinear = true;
  InterpolationMode interpolation = InterpolationMode::network;
  nn::CrossAttentionOrder cross_order = nn::CrossAttentionOrder::as_printed;

  int embed_width() const { return width / 2; }
  /// Model dimensionality; co2bb models are coordinate models.
  int dims() const { return task.dims(); }
  SpectrumShape obs_shape() const { return shape_map(transform, task.obs_steps, dims()); }
  SpectrumShape key_shape() const { return shape_map(transform, keypoints.count(), dims()); }
  SpectrumShape full_shape() const { return shape_map(transform, task.total_steps(), dims()); }
  nn::TransformerConfig transformer() const { return {width, heads, layers, hidden, cross_order}; }

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

using ModelParams = nn::ParamStore;

/// Freshly initialized parameters (Glorot-uniform weights, zero biases,
/// unit layer-norm gains) drawn from the "init" substream of `seed`.
ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed);

/// True for parameters trained by the keypoint loss.
bool is_keypoint_stage(std::string_view name);

struct ContextFeature {
  enum class Provenance { zero, external };
  Eigen::RowVectorXd values;
  Provenance provenance = Provenance::zero;

  static ContextFeature zero(int width) { return {Eigen::RowVectorXd::Zero(width), Provenance::zero}; }
  static ContextFeature external(Eigen::RowVectorXd v) { return {std::move(v), Provenance::external}; }
};

struct PredictionSet {
  std::vector<Trajectory> samples;            // K x [t_f x M]
  std::vector<Spectrum> keypoint_spectra;     // K x [N_key' x M']
  std::vector<Trajectory> spatial_keypoints;  // K x [N_key x M]
  std::vector<Spectrum> full_spectra;         // K x [N_p' x M']

  int size() const { return static_cast<int>(samples.size()); }
};

// Differentiable building blocks. All operate on one agent.

/// f_e = [f_t or f_R, f_i]: spectrum embedding (or its bilinear
/// replacement) next to the tiled noise embedding. Output N_h' x d.
nn::Var embed_observation(nn::Tape& tape, const ModelParams& p, const ModelConfig& cfg, nn::Var spectrum,
                          nn::Var noise);

/// Outer product of every row with itself, 2x2 max pooling, flatten, then
/// MLP_bi back to the input width.
nn::Var bilinear_fuse(nn::Tape& tape, const ModelParams& p, const std::string& prefix, nn::Var features);

/// The per-step outer products f_t(n)^T f_t(n) that bilinear_fuse pools:
/// one e x e matrix per row.
std::vector<nn::Matrix> bilinear_outer_products(const nn::Matrix& features);

/// Keypoint spectrum (N_key' x M') from the observed spectrum and one noise
/// draw (1 x noise_dim).
nn::Var keypoints_subnet(nn::Tape& tape, const ModelParams& p, const ModelConfig& cfg, nn::Var spectrum,
                         nn::Var noise);

/// Inverse transform of a keypoint spectrum: N_key x M positions at the
/// scheduled times.
nn::Var keypoints_to_spatial(nn::Var keypoint_spectrum, TransformKind transform);

/// Row-resampling matrix (n_out x n_in) of piecewise-linear interpolation
/// with both endpoints pinned.
nn::Matrix interpolation_matrix(int n_in, int n_out);
Spectrum interp_keypoint_spectrum(const Spectrum& keypoint_spectrum, int n_out);

/// Complete spectrum (N_p' x M') from a keypoint spectrum and the context.
/// In linear mode the network is bypassed.
nn::Var interpolation_subnet(nn::Tape& tape, const ModelParams& p, const ModelConfig& cfg,
                             nn::Var keypoint_spectrum, const ContextFeature& ctx);

/// Inverse transform of a full spectrum, sliced to the t_f future rows.
nn::Var spectrum_to_future(nn::Var full_spectrum, const ModelConfig& cfg);

/// Standard-normal noise vectors for K samples from the "noise" substream.
std::vector<Eigen::RowVectorXd> draw_noise(const ModelConfig& cfg, int count, std::uint64_t seed);

/// K stochastic predictions for one normalized observation.
PredictionSet evnet_forward(const Trajectory& obs, const ContextFeature& ctx, const ModelParams& p,
                            const ModelConfig& cfg, int samples, std::uint64_t seed);

/// Box prediction with a coordinate model: each corner stream is predicted
/// with the same seed, and the corner samples are merged back into boxes.
PredictionSet co2bb_predict(const Trajectory& obs_box, const ContextFeature& ctx, const ModelParams& p,
                            const ModelConfig& cfg, int samples, std::uint64_t seed);

}  // namespace evnet
