#include "dse/encoder.hpp"

#include <cmath>

#include "dse/counters.hpp"
#include "dse/error.hpp"

namespace dse {

void EncoderConfig::validate() const {
  if (hidden % heads != 0) throw ConfigError("encoder config: hidden must be divisible by heads");
  if (max_seq_len < 3) throw ConfigError("encoder config: max_seq_len must be >= 3");
  if (num_layers == 0 || ffn == 0 || vocab_size == 0) {
    throw ConfigError("encoder config: layers, ffn and vocab_size must be positive");
  }
  if (!(layer_norm_eps > 0.0)) throw ConfigError("encoder config: layer_norm_eps must be > 0");
}

EncoderWeights EncoderWeights::init(const EncoderConfig& cfg, SeededRng& rng) {
  cfg.validate();
  const std::size_t h = cfg.hidden, f = cfg.ffn;
  const double s = cfg.init_stddev;
  EncoderWeights w;
  w.config = cfg;
  w.tok_emb = Parameter(rng.normal_tensor({cfg.vocab_size, h}, s));
  w.pos_emb = Parameter(rng.normal_tensor({cfg.max_seq_len, h}, s));
  w.seg_emb = Parameter(rng.normal_tensor({cfg.num_segments, h}, s));
  w.emb_gamma = Parameter(Tensor::full({1, h}, 1.0));
  w.emb_beta = Parameter(Tensor({1, h}));
  w.layers.resize(cfg.num_layers);
  for (auto& l : w.layers) {
    l.wq = Parameter(rng.normal_tensor({h, h}, s));
    l.bq = Parameter(Tensor({1, h}));
    l.wk = Parameter(rng.normal_tensor({h, h}, s));
    l.bk = Parameter(Tensor({1, h}));
    l.wv = Parameter(rng.normal_tensor({h, h}, s));
    l.bv = Parameter(Tensor({1, h}));
    l.wo = Parameter(rng.normal_tensor({h, h}, s));
    l.bo = Parameter(Tensor({1, h}));
    l.attn_gamma = Parameter(Tensor::full({1, h}, 1.0));
    l.attn_beta = Parameter(Tensor({1, h}));
    l.w1 = Parameter(rng.normal_tensor({h, f}, s));
    l.b1 = Parameter(Tensor({1, f}));
    l.w2 = Parameter(rng.normal_tensor({f, h}, s));
    l.b2 = Parameter(Tensor({1, h}));
    l.ffn_gamma = Parameter(Tensor::full({1, h}, 1.0));
    l.ffn_beta = Parameter(Tensor({1, h}));
  }
  return w;
}

std::vector<std::pair<std::string, Parameter*>> EncoderWeights::named_params() {
  std::vector<std::pair<std::string, Parameter*>> out;
  out.emplace_back("tok_emb", &tok_emb);
  out.emplace_back("pos_emb", &pos_emb);
  out.emplace_back("seg_emb", &seg_emb);
  out.emplace_back("emb_gamma", &emb_gamma);
  out.emplace_back("emb_beta", &emb_beta);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    LayerWeights& l = layers[i];
    out.emplace_back(p + "wq", &l.wq);
    out.emplace_back(p + "bq", &l.bq);
    out.emplace_back(p + "wk", &l.wk);
    out.emplace_back(p + "bk", &l.bk);
    out.emplace_back(p + "wv", &l.wv);
    out.emplace_back(p + "bv", &l.bv);
    out.emplace_back(p + "wo", &l.wo);
    out.emplace_back(p + "bo", &l.bo);
    out.emplace_back(p + "attn_gamma", &l.attn_gamma);
    out.emplace_back(p + "attn_beta", &l.attn_beta);
    out.emplace_back(p + "w1", &l.w1);
    out.emplace_back(p + "b1", &l.b1);
    out.emplace_back(p + "w2", &l.w2);
    out.emplace_back(p + "b2", &l.b2);
    out.emplace_back(p + "ffn_gamma", &l.ffn_gamma);
    out.emplace_back(p + "ffn_beta", &l.ffn_beta);
  }
  return out;
}

std::size_t encoder_param_count(const EncoderConfig& cfg) {
  const std::size_t h = cfg.hidden, f = cfg.ffn;
  std::size_t n = cfg.vocab_size * h + cfg.max_seq_len * h + cfg.num_segments * h + 2 * h;
  n += cfg.num_layers * (4 * h * h + 4 * h   // qkvo + biases
                         + 2 * h             // attn layer norm
                         + h * f + f + f * h + h  // ffn
                         + 2 * h);           // ffn layer norm
  return n;
}

std::size_t SequenceInput::real_len() const {
  std::size_t n = 0;
  for (int m : mask) n += static_cast<std::size_t>(m);
  return n;
}

namespace {

SequenceInput finalize_input(std::vector<int> tokens, std::vector<int> segments,
                             std::size_t max_len) {
  SequenceInput in;
  in.mask.assign(max_len, 0);
  for (std::size_t i = 0; i < tokens.size(); ++i) in.mask[i] = 1;
  tokens.resize(max_len, 0);  // PAD
  segments.resize(max_len, 0);
  in.tokens = std::move(tokens);
  in.segments = std::move(segments);
  return in;
}

}  // namespace

SequenceInput build_pair_input(std::vector<int> a, std::vector<int> b, std::size_t max_len) {
  if (max_len < 5) {
    throw InputError("build_pair_input: max_len " + std::to_string(max_len) +
                     " cannot hold CLS + token + SEP + token + SEP");
  }
  const std::size_t budget = max_len - 3;
  while (a.size() + b.size() > budget) {
    if (a.size() > b.size())
      a.pop_back();
    else
      b.pop_back();
  }
  if (a.empty() || b.empty()) {
    throw InputError("build_pair_input: sentence empty after truncation");
  }
  std::vector<int> tokens, segments;
  tokens.reserve(max_len);
  segments.reserve(max_len);
  tokens.push_back(1);  // CLS
  segments.push_back(0);
  for (int t : a) {
    tokens.push_back(t);
    segments.push_back(0);
  }
  tokens.push_back(2);  // SEP
  segments.push_back(0);
  for (int t : b) {
    tokens.push_back(t);
    segments.push_back(1);
  }
  tokens.push_back(2);  // SEP
  segments.push_back(1);
  return finalize_input(std::move(tokens), std::move(segments), max_len);
}

SequenceInput build_single_input(std::vector<int> y, std::size_t max_len) {
  if (max_len < 3) {
    throw InputError("build_single_input: max_len " + std::to_string(max_len) + " < 3");
  }
  if (y.size() > max_len - 2) y.resize(max_len - 2);
  if (y.empty()) throw InputError("build_single_input: empty sentence");
  std::vector<int> tokens, segments;
  tokens.reserve(max_len);
  tokens.push_back(1);  // CLS
  for (int t : y) tokens.push_back(t);
  tokens.push_back(2);  // SEP
  segments.assign(tokens.size(), 0);
  return finalize_input(std::move(tokens), std::move(segments), max_len);
}

SequenceInput trim_padding(const SequenceInput& input) {
  const std::size_t n = input.real_len();
  SequenceInput out;
  out.tokens.assign(input.tokens.begin(), input.tokens.begin() + static_cast<std::ptrdiff_t>(n));
  out.segments.assign(input.segments.begin(),
                      input.segments.begin() + static_cast<std::ptrdiff_t>(n));
  out.mask.assign(input.mask.begin(), input.mask.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

std::vector<ad::Node*> encode_nodes(ad::Tape& tape, const SequenceInput& input,
                                    EncoderWeights& weights, EncodeTrace* trace) {
  const EncoderConfig& cfg = weights.config;
  const std::size_t seq = input.length();
  if (seq == 0 || seq > cfg.max_seq_len) {
    throw InputError("encode: sequence length " + std::to_string(seq) + " out of range");
  }
  std::vector<std::size_t> tok_idx(seq), pos_idx(seq), seg_idx(seq);
  for (std::size_t i = 0; i < seq; ++i) {
    const int id = input.tokens[i];
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw InputError("encode: token id " + std::to_string(id) + " out of range for vocab " +
                       std::to_string(cfg.vocab_size));
    }
    const int sg = input.segments[i];
    if (sg < 0 || static_cast<std::size_t>(sg) >= cfg.num_segments) {
      throw InputError("encode: segment id out of range");
    }
    tok_idx[i] = static_cast<std::size_t>(id);
    pos_idx[i] = i;
    seg_idx[i] = static_cast<std::size_t>(sg);
  }
  op_counters().encoder_passes.fetch_add(1, std::memory_order_relaxed);

  const std::size_t h = cfg.hidden;
  const std::size_t heads = cfg.heads;
  const std::size_t hd = h / heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(hd));

  // Additive key mask: 0 over real positions, -inf-style over PAD.
  Tensor mask_add({seq, seq});
  for (std::size_t i = 0; i < seq; ++i)
    for (std::size_t j = 0; j < seq; ++j)
      mask_add.at(i, j) = input.mask[j] ? 0.0 : -1e30;
  ad::Node* mask_node = tape.input(std::move(mask_add));

  ad::Node* emb = tape.add(tape.add(tape.gather_rows(tape.leaf(weights.tok_emb), tok_idx),
                                    tape.gather_rows(tape.leaf(weights.pos_emb), pos_idx)),
                           tape.gather_rows(tape.leaf(weights.seg_emb), seg_idx));
  ad::Node* x = tape.layer_norm(emb, tape.leaf(weights.emb_gamma), tape.leaf(weights.emb_beta),
                                cfg.layer_norm_eps);

  std::vector<ad::Node*> states;
  states.reserve(cfg.num_layers + 1);
  states.push_back(x);
  if (trace) trace->attention.assign(cfg.num_layers, {});

  for (std::size_t li = 0; li < cfg.num_layers; ++li) {
    LayerWeights& l = weights.layers[li];
    ad::Node* q = tape.add_row(tape.matmul(x, tape.leaf(l.wq)), tape.leaf(l.bq));
    ad::Node* k = tape.add_row(tape.matmul(x, tape.leaf(l.wk)), tape.leaf(l.bk));
    ad::Node* v = tape.add_row(tape.matmul(x, tape.leaf(l.wv)), tape.leaf(l.bv));

    std::vector<ad::Node*> head_ctx;
    head_ctx.reserve(heads);
    for (std::size_t a = 0; a < heads; ++a) {
      ad::Node* qa = tape.slice_cols(q, a * hd, hd);
      ad::Node* ka = tape.slice_cols(k, a * hd, hd);
      ad::Node* va = tape.slice_cols(v, a * hd, hd);
      ad::Node* scores =
          tape.add(tape.scale(tape.matmul(qa, tape.transpose(ka)), att_scale), mask_node);
      ad::Node* probs = tape.softmax_rows(scores);
      if (trace) trace->attention[li].push_back(probs->value);
      head_ctx.push_back(tape.matmul(probs, va));
    }
    ad::Node* ctx = tape.concat_cols(head_ctx);
    ad::Node* attn_out = tape.add_row(tape.matmul(ctx, tape.leaf(l.wo)), tape.leaf(l.bo));
    x = tape.layer_norm(tape.add(x, attn_out), tape.leaf(l.attn_gamma), tape.leaf(l.attn_beta),
                        cfg.layer_norm_eps);

    ad::Node* h1 = tape.relu(tape.add_row(tape.matmul(x, tape.leaf(l.w1)), tape.leaf(l.b1)));
    ad::Node* h2 = tape.add_row(tape.matmul(h1, tape.leaf(l.w2)), tape.leaf(l.b2));
    x = tape.layer_norm(tape.add(x, h2), tape.leaf(l.ffn_gamma), tape.leaf(l.ffn_beta),
                        cfg.layer_norm_eps);
    states.push_back(x);
  }
  return states;
}

std::vector<Tensor> encode(const SequenceInput& input, EncoderWeights& weights,
                           EncodeTrace* trace) {
  ad::Tape tape;
  std::vector<ad::Node*> nodes = encode_nodes(tape, input, weights, trace);
  std::vector<Tensor> out;
  out.reserve(nodes.size());
  for (ad::Node* n : nodes) out.push_back(n->value);
  return out;
}

}  // namespace dse
