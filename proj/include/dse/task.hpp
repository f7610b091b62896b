#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dse/tensor.hpp"

namespace dse {

enum class TaskKind { kBinary, kMulticlass, kRegression };

// Output dimension n: 2, 3 or 1.
std::size_t task_output_dim(TaskKind task);
std::string task_name(TaskKind task);
TaskKind task_from_name(const std::string& name);
bool task_is_classification(TaskKind task);

// One tokenized sentence pair with its ground-truth label and, once the
// teacher has scored it, the cached teacher logits.
struct TrainingExample {
  std::vector<int> sentence_a;
  std::vector<int> sentence_b;
  double label = 0.0;  // class index for classification, real value otherwise
  std::optional<Tensor> teacher_logits;  // 1 x n
};

struct LossConfig {
  double alpha = 0.5;  // Eq. 2 mixing weight, in [0, 1]
  TaskKind task = TaskKind::kBinary;

  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t minibatch = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  bool freeze_encoder = false;
  double dev_fraction = 0.1;

  void validate() const;
};

struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> f1;
  std::optional<double> pearson;   // empty = undefined (zero variance)
  std::optional<double> spearman;  // likewise
  std::optional<double> mse;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double dev_metric = 0.0;  // accuracy for classification, mse for regression
};

}  // namespace dse
