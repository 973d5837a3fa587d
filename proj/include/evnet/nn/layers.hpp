#pragma once

#include "evnet/nn/tape.hpp"

#include <random>
#include <string>

namespace evnet::nn {

enum class Activation { none, relu };

/// y = act(x W + b) with W (in x out) and b (1 x out).
Var dense(Var x, Var weight, Var bias, Activation act = Activation::none);

/// Dense layer whose weights live in `store` under "<prefix>.w" / "<prefix>.b".
Var dense(Tape& tape, const ParamStore& store, const std::string& prefix, Var x,
          Activation act = Activation::none);

/// Glorot-uniform weights and zero bias.
void init_dense(ParamStore& store, const std::string& prefix, int in, int out, std::mt19937_64& rng);
void init_dense_zero(ParamStore& store, const std::string& prefix, int in, int out);

void init_layer_norm(ParamStore& store, const std::string& prefix, int width);
Var layer_norm(Tape& tape, const ParamStore& store, const std::string& prefix, Var x);

/// Two dense layers, ReLU on the first only.
void init_mlp(ParamStore& store, const std::string& prefix, int in, int hidden, int out, std::mt19937_64& rng);
Var mlp(Tape& tape, const ParamStore& store, const std::string& prefix, Var x);

struct AttentionConfig {
  int width = 128;
  int heads = 8;
  bool bypass_mlp = false;  // skip MLP_a; used by structural tests
};

/// Query/key/value projections, output fc, and the attention MLP.
void init_attention(ParamStore& store, const std::string& prefix, int width, std::mt19937_64& rng);

/// softmax(q k^T / sqrt(d_head)) v for one head. `weights`, if given,
/// receives the attention matrix.
Var scaled_dot_attention(Var q, Var k, Var v, Matrix* weights = nullptr);

/// Multi-head attention followed by MLP_a:
///   MLP_a(fc(concat_i softmax(q_i k_i^T / sqrt(d/H)) v_i)).
Var multi_head_attention(Tape& tape, const ParamStore& store, const std::string& prefix, Var q, Var k, Var v,
                         const AttentionConfig& cfg);

enum class CrossAttentionOrder {
  as_printed,    // ATT(h_e, h, h): encoder output used as the query
  conventional,  // ATT(h, h_e, h_e)
};

struct TransformerConfig {
  int width = 128;
  int heads = 8;
  int layers = 4;
  int hidden = 512;  // first MLP_e / MLP_d layer
  CrossAttentionOrder cross_order = CrossAttentionOrder::as_printed;

  AttentionConfig attention() const { return {width, heads, false}; }
  void validate() const;
};

void init_encoder_layer(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg,
                        std::mt19937_64& rng);
/// a = ATT(h,h,h) + h; a_n = Norm(a); c = MLP_e(a_n) + a_n; out = Norm(c).
Var encoder_layer(Tape& tape, const ParamStore& store, const std::string& prefix, Var h,
                  const TransformerConfig& cfg);

void init_decoder_layer(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg,
                        std::mt19937_64& rng);
/// Self-attention sublayer, cross-attention sublayer against `encoded`,
/// then MLP_d; each with residual and normalization. With `as_printed`
/// ordering the encoder output is the query, which requires equal lengths.
Var decoder_layer(Tape& tape, const ParamStore& store, const std::string& prefix, Var h, Var encoded,
                  const TransformerConfig& cfg);

/// Sinusoidal position code for steps t = 1..steps:
/// sin(t / 10000^(i/d)) at even i, cos(t / 10000^((i-1)/d)) at odd i.
Matrix positional_encoding(int steps, int width);

void init_transformer(ParamStore& store, const std::string& prefix, const TransformerConfig& cfg,
                      std::mt19937_64& rng);
/// Encoder stack over `encoder_input`, decoder stack queried by
/// `decoder_input`; position codes are added to both. Returns the decoder
/// features (no output head).
Var transformer(Tape& tape, const ParamStore& store, const std::string& prefix, Var encoder_input,
                Var decoder_input, const TransformerConfig& cfg);

}  // namespace evnet::nn
