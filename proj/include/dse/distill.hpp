#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dse/student.hpp"
#include "dse/task.hpp"

namespace dse {

// Tape node for the combined loss of Eq.-2 form:
//   alpha * |S - T|^2 + (1 - alpha) * label_loss(S, R)
// where label_loss is softmax cross entropy for classification and
// squared L2 for regression. The alpha = 0 graph never touches T and the
// alpha = 1 graph never touches R.
ad::Node* distill_loss_nodes(ad::Tape& tape, ad::Node* student_logits,
                             const std::optional<Tensor>& teacher_logits, double label,
                             const LossConfig& cfg);

double distill_loss(const Tensor& student_logits, const std::optional<Tensor>& teacher_logits,
                    double label, const LossConfig& cfg);

// Full student loss for one example on one tape (two encoder passes, one
// head evaluation, one loss node); used by training and gradient checks.
ad::Node* student_loss_nodes(ad::Tape& tape, StudentModel& s, const TrainingExample& ex,
                             const LossConfig& cfg);

struct StudentTrainResult {
  StudentModel model;
  std::vector<EpochStats> trace;
};

// Adam minibatch training of distill_loss over the dataset. Teacher
// logits must be cached when alpha > 0; the teacher itself is never
// invoked here. freeze_encoder restricts updates to the head parameters.
// Returns the best-dev-loss checkpoint; deterministic given the seed.
StudentTrainResult train_student(const std::vector<TrainingExample>& dataset,
                                 const StudentModel& init, const LossConfig& loss_cfg,
                                 const TrainConfig& train_cfg);

// epoch,train_loss,dev_loss,dev_metric CSV.
void write_loss_trace(const std::string& path, const std::vector<EpochStats>& trace);

// Classification: argmax predictions (ties toward the lower class index),
// accuracy, binary F1 with positive class 1. Regression: MSE plus Pearson
// and Spearman (average-rank ties); correlations stay unset when either
// sequence has zero variance.
Metrics compute_metrics(const std::vector<Tensor>& predictions, const std::vector<double>& labels,
                        TaskKind task);

}  // namespace dse
