#pragma once

#include <utility>
#include <vector>

#include "dse/encoder.hpp"
#include "dse/task.hpp"

namespace dse {

// Cross-attentive pair scorer: encoder over the unified pair input, a
// linear head on the final CLS hidden state, logits taken before any
// softmax/sigmoid.
struct TeacherModel {
  EncoderWeights encoder;
  Parameter head_w;  // H x n
  Parameter head_b;  // 1 x n
  TaskKind task = TaskKind::kBinary;

  std::size_t output_dim() const { return task_output_dim(task); }
  std::vector<std::pair<std::string, Parameter*>> named_params();
};

TeacherModel init_teacher(const EncoderConfig& cfg, TaskKind task, std::uint64_t seed);

// Tape forward of the teacher logits for one pair; 1 x n node.
ad::Node* teacher_logits_nodes(ad::Tape& tape, TeacherModel& t, const std::vector<int>& a,
                               const std::vector<int>& b);

Tensor teacher_score(TeacherModel& t, const std::vector<int>& a, const std::vector<int>& b);

struct TeacherTrainResult {
  TeacherModel model;
  std::vector<EpochStats> trace;
};

// Trains a freshly initialized teacher on ground-truth labels (cross
// entropy for classification, squared L2 for regression) with Adam
// minibatches; returns the best-dev-loss checkpoint. Deterministic given
// cfg.seed.
TeacherTrainResult fine_tune_teacher(const std::vector<TrainingExample>& dataset,
                                     const EncoderConfig& enc_cfg, TaskKind task,
                                     const TrainConfig& cfg);

// Copies the dataset with teacher_logits filled in by teacher_score.
std::vector<TrainingExample> cache_teacher_scores(TeacherModel& t,
                                                  const std::vector<TrainingExample>& dataset);

}  // namespace dse
