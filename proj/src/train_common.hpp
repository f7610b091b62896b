#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dse/error.hpp"
#include "dse/rng.hpp"
#include "dse/task.hpp"

namespace dse::detail {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
};

// Seeded-shuffle split; the first ceil(frac * n) shuffled indices form
// the dev set.
inline SplitIndices dev_split(std::size_t n, double frac, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  SeededRng rng(seed ^ 0xD1B54A32D192ED03ULL);
  rng.shuffle(idx);
  std::size_t dev_n = static_cast<std::size_t>(frac * static_cast<double>(n));
  if (frac > 0.0 && dev_n == 0) dev_n = 1;
  if (dev_n >= n) dev_n = n - 1;
  SplitIndices s;
  s.dev.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(dev_n));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(dev_n), idx.end());
  return s;
}

inline void validate_labels(const std::vector<TrainingExample>& dataset, TaskKind task) {
  const std::size_t n = task_output_dim(task);
  for (const auto& ex : dataset) {
    if (task_is_classification(task)) {
      const double l = ex.label;
      if (l != static_cast<double>(static_cast<long>(l)) || l < 0 ||
          l >= static_cast<double>(n)) {
        throw InputError("class label " + std::to_string(l) + " invalid for task " +
                         task_name(task));
      }
    } else if (!(ex.label == ex.label) || !std::isfinite(ex.label)) {
      throw InputError("regression label must be finite");
    }
  }
}

// Argmax with ties broken toward the lower index.
inline std::size_t argmax_logit(const Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.size(); ++j) {
    if (logits[j] > logits[best]) best = j;
  }
  return best;
}

}  // namespace dse::detail
