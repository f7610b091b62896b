#pragma once

#include <utility>
#include <vector>

#include "dse/encoder.hpp"
#include "dse/task.hpp"

namespace dse {

// Siamese embedding model: one shared encoder realizes both embedding
// roles, and a two-layer bias-free head scores embedding pairs via
// h = [u, v, u*v, |u-v|].
struct StudentModel {
  EncoderWeights encoder;
  Parameter head_W;  // r x 4d
  Parameter head_w;  // n x r
  TaskKind task = TaskKind::kBinary;
  std::size_t pooled_layers = 4;  // P = min(4, L)

  std::size_t embedding_dim() const { return pooled_layers * encoder.config.hidden; }
  std::size_t output_dim() const { return task_output_dim(task); }
  std::vector<std::pair<std::string, Parameter*>> named_params();
  std::vector<Parameter*> head_params() { return {&head_W, &head_w}; }
};

StudentModel init_student(const EncoderConfig& cfg, TaskKind task, std::size_t head_hidden,
                          std::uint64_t seed);

// Experiment variant: encoder copied from the fine-tuned teacher, head
// freshly initialized.
struct TeacherModel;
StudentModel init_student_from_teacher(const TeacherModel& teacher, std::size_t head_hidden,
                                       std::uint64_t seed);

// Mean over real non-CLS positions (SEP included, PAD and CLS excluded)
// for each of the last P layers, concatenated earliest-first into a
// 1 x (P*H) row. Exposed for direct testing against mocked hidden states.
Tensor pool_hidden_states(const std::vector<Tensor>& hidden_states, const SequenceInput& input,
                          std::size_t pooled_layers);

ad::Node* embed_sentence_nodes(ad::Tape& tape, StudentModel& s, const std::vector<int>& y);
Tensor embed_sentence(StudentModel& s, const std::vector<int>& y);

ad::Node* similarity_head_nodes(ad::Tape& tape, StudentModel& s, ad::Node* u, ad::Node* v);
// Plain-tensor head evaluation; increments the head-eval counter.
Tensor similarity_head(StudentModel& s, const Tensor& u, const Tensor& v);

// f(psi(y), psi(z)): exactly two encoder passes and one head evaluation.
Tensor student_score(StudentModel& s, const std::vector<int>& y, const std::vector<int>& z);

}  // namespace dse
