#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dse/autodiff.hpp"
#include "dse/rng.hpp"
#include "dse/tensor.hpp"

namespace dse {

struct EncoderConfig {
  std::size_t num_layers = 4;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  std::size_t ffn = 256;
  std::size_t max_seq_len = 32;
  std::size_t vocab_size = 512;
  std::size_t num_segments = 2;
  double layer_norm_eps = 1e-12;
  double init_stddev = 0.02;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

struct LayerWeights {
  Parameter wq, bq, wk, bk, wv, bv, wo, bo;
  Parameter attn_gamma, attn_beta;
  Parameter w1, b1, w2, b2;
  Parameter ffn_gamma, ffn_beta;
};

// All parameters of one transformer encoder; shared by the teacher and
// student roles. Residual + post-layer-norm ordering, learned absolute
// position embeddings, ReLU FFN.
struct EncoderWeights {
  EncoderConfig config;
  Parameter tok_emb, pos_emb, seg_emb;
  Parameter emb_gamma, emb_beta;
  std::vector<LayerWeights> layers;

  static EncoderWeights init(const EncoderConfig& cfg, SeededRng& rng);
  std::vector<std::pair<std::string, Parameter*>> named_params();
};

// Expected parameter count for a config; pure function of the config.
std::size_t encoder_param_count(const EncoderConfig& cfg);

// Fixed-length model input. Position 0 is CLS, every real token run ends
// with SEP, and the mask is a prefix of 1s followed by 0s.
struct SequenceInput {
  std::vector<int> tokens;
  std::vector<int> segments;
  std::vector<int> mask;

  std::size_t length() const { return tokens.size(); }
  std::size_t real_len() const;
};

// [CLS, a..., SEP, b..., SEP] padded to max_len; segment 1 covers b and
// its SEP. When the pair does not fit, trailing tokens are dropped from
// the longer sentence first (ties truncate b).
SequenceInput build_pair_input(std::vector<int> a, std::vector<int> b, std::size_t max_len);

// [CLS, y..., SEP] padded to max_len; all segment ids 0.
SequenceInput build_single_input(std::vector<int> y, std::size_t max_len);

// Copy of `input` with trailing PAD positions removed. Because masked
// attention weights underflow to exactly 0.0, encoding the trimmed input
// yields bit-identical hidden states for the real positions; scoring and
// pooling use this to skip dead PAD computation.
SequenceInput trim_padding(const SequenceInput& input);

// Per-layer, per-head attention probability matrices captured during a
// forward pass.
struct EncodeTrace {
  std::vector<std::vector<Tensor>> attention;
};

// Tape-based forward pass; returns L+1 hidden-state nodes (embeddings
// after norm first). PAD key positions are masked to -inf before the
// attention softmax. Increments the encoder-pass counter.
std::vector<ad::Node*> encode_nodes(ad::Tape& tape, const SequenceInput& input,
                                    EncoderWeights& weights, EncodeTrace* trace = nullptr);

// Inference wrapper around encode_nodes on a local tape.
std::vector<Tensor> encode(const SequenceInput& input, EncoderWeights& weights,
                           EncodeTrace* trace = nullptr);

}  // namespace dse
