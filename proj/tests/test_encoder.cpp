#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include <doctest.h>

#include "dse/counters.hpp"
#include "dse/encoder.hpp"
#include "dse/error.hpp"
#include "dse/vocab.hpp"

using dse::EncoderConfig;
using dse::SequenceInput;
using dse::Tensor;
using dse::Vocabulary;

namespace {

EncoderConfig small_config() {
  EncoderConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden = 8;
  cfg.heads = 2;
  cfg.ffn = 16;
  cfg.max_seq_len = 12;
  cfg.vocab_size = 64;
  return cfg;
}

std::vector<int> random_sentence(dse::SeededRng& rng, std::size_t len, std::size_t vocab_size) {
  std::vector<int> s(len);
  for (auto& id : s)
    id = Vocabulary::kNumReserved +
         static_cast<int>(rng.uniform_int(vocab_size - Vocabulary::kNumReserved));
  return s;
}

// Recovers the (possibly truncated) a and b runs from a pair layout.
std::pair<std::vector<int>, std::vector<int>> depad_pair(const SequenceInput& in) {
  std::vector<int> a, b;
  std::size_t i = 1;  // skip CLS
  for (; in.tokens[i] != Vocabulary::kSep; ++i) a.push_back(in.tokens[i]);
  ++i;  // first SEP
  for (; in.tokens[i] != Vocabulary::kSep; ++i) b.push_back(in.tokens[i]);
  return {a, b};
}

}  // namespace

TEST_CASE("tokenize does direct lookup with UNK fallback") {
  const char* path = "test_vocab_tmp.txt";
  {
    std::ofstream out(path);
    out << "a\nb\n";
  }
  Vocabulary vocab = Vocabulary::load(path);
  std::remove(path);
  CHECK(tokenize("a b a", vocab) == std::vector<int>{4, 5, 4});
  CHECK(tokenize("z", vocab) == std::vector<int>{Vocabulary::kUnk});
  CHECK(tokenize("", vocab).empty());
}

TEST_CASE("tokenization preserves whitespace token count") {
  Vocabulary vocab = Vocabulary::synthetic(128);
  dse::SeededRng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + rng.uniform_int(12);
    std::ostringstream text;
    for (std::size_t i = 0; i < len; ++i) {
      if (i) text << ' ';
      text << vocab.token_text(Vocabulary::kNumReserved + static_cast<int>(rng.uniform_int(100)));
    }
    CHECK(tokenize(text.str(), vocab).size() == len);
  }
}

TEST_CASE("pair input layout for a=[7], b=[9], max_len=6") {
  SequenceInput in = dse::build_pair_input({7}, {9}, 6);
  CHECK(in.tokens == std::vector<int>{Vocabulary::kCls, 7, Vocabulary::kSep, 9, Vocabulary::kSep,
                                      Vocabulary::kPad});
  CHECK(in.segments == std::vector<int>{0, 0, 0, 1, 1, 0});
  CHECK(in.mask == std::vector<int>{1, 1, 1, 1, 1, 0});
}

TEST_CASE("pair input truncates the longer sentence first") {
  const std::size_t max_len = 8;
  std::vector<int> a(max_len, 7);  // as long as the whole budget
  SequenceInput in = dse::build_pair_input(a, {9, 10}, max_len);
  CHECK(in.tokens.size() == max_len);
  auto [ra, rb] = depad_pair(in);
  CHECK(rb == std::vector<int>{9, 10});
  CHECK(ra == std::vector<int>(max_len - 3 - 2, 7));
  CHECK(in.mask == std::vector<int>(max_len, 1));
}

TEST_CASE("pair input round-trips truncated sentences for 500 random pairs") {
  dse::SeededRng rng(32);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t max_len = 7 + rng.uniform_int(12);
    std::vector<int> a = random_sentence(rng, 1 + rng.uniform_int(max_len), 64);
    std::vector<int> b = random_sentence(rng, 1 + rng.uniform_int(max_len), 64);
    SequenceInput in = dse::build_pair_input(a, b, max_len);
    REQUIRE(in.tokens.size() == max_len);

    // Reference truncation: drop trailing tokens of the longer sentence
    // first (ties truncate b) until CLS + a + SEP + b + SEP fits.
    std::vector<int> ta = a, tb = b;
    while (ta.size() + tb.size() > max_len - 3) {
      if (ta.size() > tb.size()) ta.pop_back();
      else tb.pop_back();
    }
    auto [ra, rb] = depad_pair(in);
    CHECK(ra == ta);
    CHECK(rb == tb);
  }
}

TEST_CASE("pair input rejects a too-small max_len and empty survivors") {
  CHECK_THROWS_AS((void)dse::build_pair_input({7}, {9}, 4), dse::InputError);
  CHECK_THROWS_AS((void)dse::build_pair_input({}, {9}, 8), dse::InputError);
}

TEST_CASE("single input layout for y=[7,8], max_len=5") {
  SequenceInput in = dse::build_single_input({7, 8}, 5);
  CHECK(in.tokens == std::vector<int>{Vocabulary::kCls, 7, 8, Vocabulary::kSep, Vocabulary::kPad});
  CHECK(in.segments == std::vector<int>{0, 0, 0, 0, 0});
  CHECK(in.mask == std::vector<int>{1, 1, 1, 1, 0});
}

TEST_CASE("single input truncates long sentences and keeps segments zero") {
  dse::SeededRng rng(33);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t max_len = 3 + rng.uniform_int(10);
    std::vector<int> y = random_sentence(rng, 1 + rng.uniform_int(2 * max_len), 64);
    SequenceInput in = dse::build_single_input(y, max_len);
    CHECK(in.tokens.size() == max_len);
    CHECK(in.tokens[0] == Vocabulary::kCls);
    for (int seg : in.segments) CHECK(seg == 0);
    const std::size_t keep = std::min(y.size(), max_len - 2);
    for (std::size_t i = 0; i < keep; ++i) CHECK(in.tokens[1 + i] == y[i]);
    CHECK(in.tokens[1 + keep] == Vocabulary::kSep);
  }
}

TEST_CASE("trim_padding keeps exactly the masked prefix") {
  SequenceInput in = dse::build_single_input({7, 8}, 6);
  SequenceInput t = dse::trim_padding(in);
  CHECK(t.tokens == std::vector<int>{Vocabulary::kCls, 7, 8, Vocabulary::kSep});
  CHECK(t.segments == std::vector<int>{0, 0, 0, 0});
  CHECK(t.mask == std::vector<int>{1, 1, 1, 1});
  // A full-length input is returned unchanged.
  SequenceInput full = dse::build_pair_input({7, 8}, {9}, 6);
  SequenceInput tf = dse::trim_padding(full);
  CHECK(tf.tokens == full.tokens);
  CHECK(tf.real_len() == full.real_len());
}

TEST_CASE("trimmed encoding matches the padded encoding on real rows") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(99);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  SequenceInput padded = dse::build_pair_input({5, 6, 7}, {8, 9}, cfg.max_seq_len);
  SequenceInput trimmed = dse::trim_padding(padded);
  REQUIRE(trimmed.length() < padded.length());
  const auto hp = dse::encode(padded, w);
  const auto ht = dse::encode(trimmed, w);
  REQUIRE(hp.size() == ht.size());
  for (std::size_t l = 0; l < hp.size(); ++l) {
    for (std::size_t i = 0; i < trimmed.length(); ++i) {
      for (std::size_t j = 0; j < cfg.hidden; ++j) {
        CHECK(hp[l].at(i, j) == ht[l].at(i, j));  // bit-identical, not approximate
      }
    }
  }
}

TEST_CASE("encode returns L+1 hidden states of shape seq_len x H") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(34);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  SequenceInput in = dse::build_pair_input({5, 6}, {7}, cfg.max_seq_len);
  std::vector<Tensor> hs = dse::encode(in, w);
  REQUIRE(hs.size() == cfg.num_layers + 1);
  for (const Tensor& h : hs) {
    CHECK(h.rows() == cfg.max_seq_len);
    CHECK(h.cols() == cfg.hidden);
    CHECK(h.all_finite());
  }
}

TEST_CASE("hidden states at real positions are invariant to trailing PAD count") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(35);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  SequenceInput short_in = dse::build_pair_input({5, 6}, {7}, 8);
  SequenceInput long_in = dse::build_pair_input({5, 6}, {7}, cfg.max_seq_len);
  std::vector<Tensor> a = dse::encode(short_in, w);
  std::vector<Tensor> b = dse::encode(long_in, w);
  const std::size_t real = short_in.real_len();
  REQUIRE(real == 6);
  for (std::size_t layer = 0; layer <= cfg.num_layers; ++layer) {
    for (std::size_t i = 0; i < real; ++i) {
      for (std::size_t j = 0; j < cfg.hidden; ++j) {
        CHECK(std::abs(a[layer].at(i, j) - b[layer].at(i, j)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("encode is deterministic for a fixed seed") {
  EncoderConfig cfg = small_config();
  SequenceInput in = dse::build_pair_input({5, 6, 9}, {7, 8}, cfg.max_seq_len);
  dse::SeededRng r1(36), r2(36);
  dse::EncoderWeights w1 = dse::EncoderWeights::init(cfg, r1);
  dse::EncoderWeights w2 = dse::EncoderWeights::init(cfg, r2);
  std::vector<Tensor> a = dse::encode(in, w1);
  std::vector<Tensor> b = dse::encode(in, w2);
  for (std::size_t layer = 0; layer < a.size(); ++layer) {
    for (std::size_t i = 0; i < a[layer].size(); ++i) CHECK(a[layer][i] == b[layer][i]);
  }
}

TEST_CASE("attention rows sum to one and PAD columns get no weight") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(37);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  SequenceInput in = dse::build_pair_input({5, 6}, {7}, cfg.max_seq_len);
  dse::EncodeTrace trace;
  (void)dse::encode(in, w, &trace);
  REQUIRE(trace.attention.size() == cfg.num_layers);
  const std::size_t real = in.real_len();
  for (const auto& layer : trace.attention) {
    REQUIRE(layer.size() == cfg.heads);
    for (const Tensor& probs : layer) {
      for (std::size_t q = 0; q < probs.rows(); ++q) {
        double sum = 0.0;
        for (std::size_t k = 0; k < probs.cols(); ++k) {
          sum += probs.at(q, k);
          if (k >= real) CHECK(probs.at(q, k) < 1e-12);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("encode is sensitive to token order") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(38);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  std::vector<Tensor> a = dse::encode(dse::build_pair_input({5, 6}, {7}, 10), w);
  std::vector<Tensor> b = dse::encode(dse::build_pair_input({6, 5}, {7}, 10), w);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.back().size(); ++i) diff += std::abs(a.back()[i] - b.back()[i]);
  CHECK(diff > 1e-6);
}

TEST_CASE("encoder pass counter increments once per forward") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(39);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  SequenceInput in = dse::build_single_input({5, 6}, cfg.max_seq_len);
  const auto before = dse::counters_snapshot();
  (void)dse::encode(in, w);
  (void)dse::encode(in, w);
  const auto delta = dse::counters_delta(before, dse::counters_snapshot());
  CHECK(delta.encoder_passes == 2);
  CHECK(delta.head_evals == 0);
}

TEST_CASE("encode rejects out-of-range ids and overlong inputs") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(40);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  SequenceInput in = dse::build_single_input({static_cast<int>(cfg.vocab_size)}, 6);
  CHECK_THROWS_AS((void)dse::encode(in, w), dse::InputError);
  SequenceInput long_in = dse::build_single_input({5}, cfg.max_seq_len + 1);
  CHECK_THROWS_AS((void)dse::encode(long_in, w), dse::InputError);
}

TEST_CASE("parameter count matches the config formula") {
  EncoderConfig cfg = small_config();
  dse::SeededRng rng(41);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  std::size_t total = 0;
  for (auto& [name, p] : w.named_params()) total += p->value.size();
  CHECK(total == dse::encoder_param_count(cfg));
}

TEST_CASE("encoder gradient passes the finite-difference check") {
  EncoderConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden = 4;
  cfg.heads = 2;
  cfg.ffn = 8;
  cfg.max_seq_len = 6;
  cfg.vocab_size = 16;
  dse::SeededRng rng(42);
  dse::EncoderWeights w = dse::EncoderWeights::init(cfg, rng);
  SequenceInput in = dse::build_pair_input({5}, {6}, cfg.max_seq_len);
  dse::SeededRng probe_rng(43);
  Tensor probe = probe_rng.normal_tensor({cfg.max_seq_len, cfg.hidden}, 1.0);

  auto loss = [&](bool compute_grad) {
    dse::ad::Tape tape;
    std::vector<dse::ad::Node*> hs = dse::encode_nodes(tape, in, w);
    auto* l = tape.sum_all(tape.mul(hs.back(), tape.input(probe)));
    if (compute_grad) tape.backward(l);
    return l->value[0];
  };
  std::vector<dse::Parameter*> params;
  for (auto& [name, p] : w.named_params()) params.push_back(p);
  CHECK(dse::finite_diff_check(loss, params, 1e-5) <= 1e-5);
}
