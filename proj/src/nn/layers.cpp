#include "evnet/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace evnet::nn {

Var dense(Var x, Var weight, Var bias, Activation act) {
  if (x.cols() != weight.rows() || bias.rows() != 1 || bias.cols() != weight.cols())
    throw std::invalid_argument("dense: shape mismatch");
  Var y = add_row(matmul(x, weight), bias);
  return act == Activation::relu ? relu(y) : y;
}

Var dense(Tape& tape, const ParamStore& store, const std::string& prefix, Var x, Activation act) {
  return dense(x, tape.param(store, prefix + ".w"), tape.param(store, prefix + ".b"), act);
}

void init_dense(ParamStore& store, const std::string& prefix, int in, int out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / double(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(in, out);
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
  store.set(prefix + ".w", std::move(w));
  store.set(prefix + ".b", Matrix::Zero(1, out));
}

void init_dense_zero(ParamStore& store, const std::string& prefix, int in, int out) {
  store.set(prefix + ".w", Matrix::Zero(in, out));
  store.set(prefix + ".b", Matrix::Zero(1, out));
}

void init_layer_norm(ParamStore& store, const std::string& prefix, int width) {
  store.set(prefix + ".gain", Matrix::Ones(1, width));
  store.set(prefix + ".bias", Matrix::Zero(1, width));
}

Var layer_norm(Tape& tape, const ParamStore& store, const std::string& prefix, Var x) {
  return layer_norm(x, tape.param(store, prefix + ".gain"), tape.param(store, prefix + ".bias"));
}

void init_mlp(ParamStore& store, const std::string& prefix, int in, int hidden, int out, std::mt19937_64& rng) {
  init_dense(store, prefix + ".0", in, hidden, rng);
  init_dense(store, prefix + ".1", hidden, out, rng);
}

Var mlp(Tape& tape, const ParamStore& store, const std::string& prefix, Var x) {
  Var h = dense(tape, store, prefix + ".0", x, Activation::relu);
  return dense(tape, store, prefix + ".1", h, Activation::none);
}

void init_attention(ParamStore& store, const std::string& prefix, int width, std::mt19937_64& rng) {
  for (const char* proj : {".q", ".k", ".v"}) {
    const double limit = std::sqrt(6.0 / double(2 * width));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(width, width);
    for (Eigen::Index c = 0; c < width; ++c)
      for (Eigen::Index r = 0; r < width; ++r) w(r, c) = dist(rng);
    store.set(prefix + proj, std::move(w));
  }
  init_dense(store, prefix + ".fc", width, width, rng);
  init_mlp(store, prefix + ".mlp", width, width, width, rng);
}

Var scaled_dot_attention(Var q, Var k, Var v, Matrix* weights) {
  if (q.cols() != k.cols() || k.rows() != v.rows())
    throw std::invalid_argument("attention: shape mismatch");
  const double inv_sqrt = 1.0 / std::sqrt(double(q.cols()));
  Var scores = scale(matmul(q, transpose(k)), inv_sqrt);
  Var attn = softmax_rows(scores);
  if (weights) *weights = attn.value();
  return matmul(attn, v);
}

Var multi_head_attention(Tape& tape, const ParamStore& store, const std::string& prefix, Var q, Var k, Var v,
                         const AttentionConfig& cfg) {
  const int d = cfg.width;
  if (cfg.heads < 1 || d % cfg.heads != 0) throw std::invalid_argument("attention: width not divisible by heads");
  if (q.cols() != d || k.cols() != d || v.cols() != d || k.rows() != v.rows())
    throw std::invalid_argument("attention: shape mismatch");
  const int head = d / cfg.heads;
  Var qp = matmul(q, tape.param(store, prefix + ".q"));
  Var kp = matmul(k, tape.param(store, prefix + ".k"));
  Var vp = matmul(v, tape.param(store, prefix + ".v"));
  std::vector<Var> heads;
  heads.reserve(static_cast<std::size_t>(cfg.heads));
  for (int i = 0; i < cfg.heads; ++i) {
    heads.push_back(scaled_dot_attention(slice_cols(qp, i * head, head), slice_cols(kp, i * head, head),
                                         slice_cols(vp, i * head, head)));
  }
  Var merged = dense(tape, store, prefix + ".fc", cfg.heads == 1 ? heads.front() : concat_cols(heads));
  if (cfg.bypass_mlp) return merged;
  return mlp(tape, store, prefix + ".mlp", merged);
}

void TransformerConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("transformer needs at least one layer");
  if (heads < 1 || width % heads != 0) throw std::invalid_argument("transformer width not divisible by heads");
  if (hidden < 1) throw std::invalid_argument("transformer hidden width must be positive");
}

void init_encoder_layer(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg,
                        std::mt19937_64& rng) {
  init_attention(store, prefix + ".att", cfg.width, rng);
  init_layer_norm(store, prefix + ".norm1", cfg.width);
  init_mlp(store, prefix + ".mlp", cfg.width, cfg.hidden, cfg.width, rng);
  init_layer_norm(store, prefix + ".norm2", cfg.width);
}

Var encoder_layer(Tape& tape, const ParamStore& store, const std::string& prefix, Var h,
                  const TransformerConfig& cfg) {
  if (h.cols() != cfg.width) throw std::invalid_argument("encoder_layer: width mismatch");
  Var a = add(multi_head_attention(tape, store, prefix + ".att", h, h, h, cfg.attention()), h);
  Var an = layer_norm(tape, store, prefix + ".norm1", a);
  Var c = add(mlp(tape, store, prefix + ".mlp", an), an);
  return layer_norm(tape, store, prefix + ".norm2", c);
}

void init_decoder_layer(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg,
                        std::mt19937_64& rng) {
  init_attention(store, prefix + ".self", cfg.width, rng);
  init_layer_norm(store, prefix + ".norm1", cfg.width);
  init_attention(store, prefix + ".cross", cfg.width, rng);
  init_layer_norm(store, prefix + ".norm2", cfg.width);
  init_mlp(store, prefix + ".mlp", cfg.width, cfg.hidden, cfg.width, rng);
  init_layer_norm(store, prefix + ".norm3", cfg.width);
}

Var decoder_layer(Tape& tape, const ParamStore& store, const std::string& prefix, Var h, Var encoded,
                  const TransformerConfig& cfg) {
  if (h.cols() != cfg.width || encoded.cols() != cfg.width)
    throw std::invalid_argument("decoder_layer: width mismatch");
  Var a = add(multi_head_attention(tape, store, prefix + ".self", h, h, h, cfg.attention()), h);
  Var an = layer_norm(tape, store, prefix + ".norm1", a);
  Var cross;
  if (cfg.cross_order == CrossAttentionOrder::as_printed) {
    if (encoded.rows() != h.rows())
      throw std::invalid_argument("decoder_layer: as-printed cross attention needs equal sequence lengths");
    cross = multi_head_attention(tape, store, prefix + ".cross", encoded, an, an, cfg.attention());
  } else {
    cross = multi_head_attention(tape, store, prefix + ".cross", an, encoded, encoded, cfg.attention());
  }
  Var a2 = add(cross, an);
  Var a2n = layer_norm(tape, store, prefix + ".norm2", a2);
  Var c = add(mlp(tape, store, prefix + ".mlp", a2n), a2n);
  return layer_norm(tape, store, prefix + ".norm3", c);
}

Matrix positional_encoding(int steps, int width) {
  if (width % 2 != 0) throw std::invalid_argument("positional_encoding: width must be even");
  Matrix out(steps, width);
  for (int row = 0; row < steps; ++row) {
    const double t = double(row + 1);
    for (int i = 0; i < width; ++i) {
      const int even = i - (i % 2);
      const double angle = t / std::pow(10000.0, double(even) / double(width));
      out(row, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return out;
}

void init_transformer(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg,
                      std::mt19937_64& rng) {
  cfg.validate();
  for (int l = 0; l < cfg.layers; ++l) init_encoder_layer(store, prefix + ".enc" + std::to_string(l), cfg, rng);
  for (int l = 0; l < cfg.layers; ++l) init_decoder_layer(store, prefix + ".dec" + std::to_string(l), cfg, rng);
}

Var transformer(Tape& tape, const ParamStore& store, const std::string& prefix, Var encoder_input,
                Var decoder_input, const TransformerConfig& cfg) {
  Var h = add(encoder_input, tape.constant(positional_encoding(int(encoder_input.rows()), cfg.width)));
  for (int l = 0; l < cfg.layers; ++l) h = encoder_layer(tape, store, prefix + ".enc" + std::to_string(l), h, cfg);
  Var g = add(decoder_input, tape.constant(positional_encoding(int(decoder_input.rows()), cfg.width)));
  for (int l = 0; l < cfg.layers; ++l)
    g = decoder_layer(tape, store, prefix + ".dec" + std::to_string(l), g, h, cfg);
  return g;
}

}  // namespace evnet::nn
