#include "dse/student.hpp"

#include <cmath>
#include <vector>

#include "dse/counters.hpp"
#include "dse/error.hpp"
#include "dse/teacher.hpp"

namespace dse {

std::vector<std::pair<std::string, Parameter*>> StudentModel::named_params() {
  auto out = encoder.named_params();
  out.emplace_back("head.W", &head_W);
  out.emplace_back("head.w", &head_w);
  return out;
}

namespace {

void init_student_head(StudentModel& s, std::size_t head_hidden, SeededRng& rng) {
  const std::size_t d = s.embedding_dim();
  const double stddev = s.encoder.config.init_stddev;
  s.head_W = Parameter(rng.normal_tensor({head_hidden, 4 * d}, stddev));
  s.head_w = Parameter(rng.normal_tensor({task_output_dim(s.task), head_hidden}, stddev));
}

}  // namespace

StudentModel init_student(const EncoderConfig& cfg, TaskKind task, std::size_t head_hidden,
                          std::uint64_t seed) {
  SeededRng rng(seed);
  StudentModel s;
  s.encoder = EncoderWeights::init(cfg, rng);
  s.task = task;
  s.pooled_layers = std::min<std::size_t>(4, cfg.num_layers);
  init_student_head(s, head_hidden, rng);
  return s;
}

StudentModel init_student_from_teacher(const TeacherModel& teacher, std::size_t head_hidden,
                                       std::uint64_t seed) {
  SeededRng rng(seed);
  StudentModel s;
  s.encoder = teacher.encoder;
  s.task = teacher.task;
  s.pooled_layers = std::min<std::size_t>(4, s.encoder.config.num_layers);
  init_student_head(s, head_hidden, rng);
  return s;
}

Tensor pool_hidden_states(const std::vector<Tensor>& hidden_states, const SequenceInput& input,
                          std::size_t pooled_layers) {
  if (hidden_states.empty() || pooled_layers == 0 || pooled_layers + 1 > hidden_states.size()) {
    throw InputError("pool_hidden_states: pooled_layers out of range");
  }
  const std::size_t seq = input.length();
  const std::size_t h = hidden_states.back().cols();
  // Position 0 (CLS) and PAD positions carry weight zero; everything
  // else, SEP included, averages with equal weight.
  std::size_t count = 0;
  for (std::size_t i = 1; i < seq; ++i) count += static_cast<std::size_t>(input.mask[i]);
  if (count == 0) throw InputError("pool_hidden_states: no real non-CLS positions");
  Tensor pool({1, seq});
  for (std::size_t i = 1; i < seq; ++i) {
    pool.at(0, i) = input.mask[i] ? 1.0 / static_cast<double>(count) : 0.0;
  }
  const std::size_t num_layers = hidden_states.size() - 1;
  Tensor out({1, pooled_layers * h});
  std::size_t off = 0;
  for (std::size_t l = num_layers - pooled_layers + 1; l <= num_layers; ++l) {
    const Tensor pooled = matmul(pool, hidden_states[l]);
    for (std::size_t j = 0; j < h; ++j) out[off + j] = pooled[j];
    off += h;
  }
  return out;
}

ad::Node* embed_sentence_nodes(ad::Tape& tape, StudentModel& s, const std::vector<int>& y) {
  if (y.empty()) throw InputError("embed_sentence: empty sentence");
  const SequenceInput input =
      trim_padding(build_single_input(y, s.encoder.config.max_seq_len));
  std::vector<ad::Node*> states = encode_nodes(tape, input, s.encoder);

  const std::size_t seq = input.length();
  std::size_t count = 0;
  for (std::size_t i = 1; i < seq; ++i) count += static_cast<std::size_t>(input.mask[i]);
  Tensor pool({1, seq});
  for (std::size_t i = 1; i < seq; ++i) {
    pool.at(0, i) = input.mask[i] ? 1.0 / static_cast<double>(count) : 0.0;
  }
  ad::Node* pool_node = tape.input(std::move(pool));

  const std::size_t num_layers = s.encoder.config.num_layers;
  std::vector<ad::Node*> parts;
  parts.reserve(s.pooled_layers);
  for (std::size_t l = num_layers - s.pooled_layers + 1; l <= num_layers; ++l) {
    parts.push_back(tape.matmul(pool_node, states[l]));
  }
  return tape.concat_cols(parts);
}

Tensor embed_sentence(StudentModel& s, const std::vector<int>& y) {
  ad::Tape tape;
  return embed_sentence_nodes(tape, s, y)->value;
}

ad::Node* similarity_head_nodes(ad::Tape& tape, StudentModel& s, ad::Node* u, ad::Node* v) {
  const std::size_t d = s.embedding_dim();
  if (u->value.size() != d || v->value.size() != d) {
    throw ShapeError("similarity_head: embeddings " + u->value.shape_str() + ", " +
                     v->value.shape_str() + " do not match d=" + std::to_string(d));
  }
  op_counters().head_evals.fetch_add(1, std::memory_order_relaxed);
  ad::Node* h = tape.concat_cols({u, v, tape.mul(u, v), tape.abs(tape.sub(u, v))});
  ad::Node* hidden = tape.relu(tape.matmul(h, tape.transpose(tape.leaf(s.head_W))));
  return tape.matmul(hidden, tape.transpose(tape.leaf(s.head_w)));
}

Tensor similarity_head(StudentModel& s, const Tensor& u, const Tensor& v) {
  // Tape-free inference path: building a tape per call dominates retrieval
  // cost (node allocations plus a full copy of head_W for the transpose).
  // The loops below accumulate in the same order as the tape version, so
  // the results are bit-identical.
  const std::size_t d = s.embedding_dim();
  if (u.size() != d || v.size() != d) {
    throw ShapeError("similarity_head: embeddings " + u.shape_str() + ", " + v.shape_str() +
                     " do not match d=" + std::to_string(d));
  }
  op_counters().head_evals.fetch_add(1, std::memory_order_relaxed);
  std::vector<double> h(4 * d);
  const double* pu = u.data();
  const double* pv = v.data();
  for (std::size_t j = 0; j < d; ++j) {
    h[j] = pu[j];
    h[d + j] = pv[j];
    h[2 * d + j] = pu[j] * pv[j];
    h[3 * d + j] = std::fabs(pu[j] - pv[j]);
  }
  const std::size_t r = s.head_W.value.rows();
  const double* pw = s.head_W.value.data();
  std::vector<double> hidden(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double* wrow = pw + i * 4 * d;
    double acc = 0.0;
    for (std::size_t t = 0; t < 4 * d; ++t) acc += h[t] * wrow[t];
    hidden[i] = acc > 0.0 ? acc : 0.0;
  }
  const std::size_t n = s.head_w.value.rows();
  const double* pv2 = s.head_w.value.data();
  Tensor out({1, n});
  double* po = out.data();
  for (std::size_t k = 0; k < n; ++k) {
    const double* vrow = pv2 + k * r;
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += hidden[i] * vrow[i];
    po[k] = acc;
  }
  return out;
}

Tensor student_score(StudentModel& s, const std::vector<int>& y, const std::vector<int>& z) {
  const Tensor u = embed_sentence(s, y);
  const Tensor v = embed_sentence(s, z);
  return similarity_head(s, u, v);
}

}  // namespace dse
