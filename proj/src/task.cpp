#include "dse/task.hpp"

#include "dse/error.hpp"

namespace dse {

std::size_t task_output_dim(TaskKind task) {
  switch (task) {
    case TaskKind::kBinary: return 2;
    case TaskKind::kMulticlass: return 3;
    case TaskKind::kRegression: return 1;
  }
  throw ConfigError("unknown task kind");
}

std::string task_name(TaskKind task) {
  switch (task) {
    case TaskKind::kBinary: return "binary";
    case TaskKind::kMulticlass: return "multiclass";
    case TaskKind::kRegression: return "regression";
  }
  throw ConfigError("unknown task kind");
}

TaskKind task_from_name(const std::string& name) {
  if (name == "binary") return TaskKind::kBinary;
  if (name == "multiclass") return TaskKind::kMulticlass;
  if (name == "regression") return TaskKind::kRegression;
  throw ConfigError("unknown task kind: " + name);
}

bool task_is_classification(TaskKind task) { return task != TaskKind::kRegression; }

void LossConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

void TrainConfig::validate() const {
  if (minibatch < 1) throw ConfigError("minibatch size must be >= 1");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) {
    throw ConfigError("dev_fraction must lie in [0, 1)");
  }
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be >= 0");
}

}  // namespace dse
