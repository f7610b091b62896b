#pragma once

#include <atomic>
#include <cstdint>

namespace dse {

// Global monotone operation counters. encode() bumps encoder_passes once
// per forward pass; similarity_head() bumps head_evals once per
// evaluation. Cost-model assertions diff snapshots around a region.
struct OpCounters {
  std::atomic<std::uint64_t> encoder_passes{0};
  std::atomic<std::uint64_t> head_evals{0};
};

OpCounters& op_counters();

struct CounterSnapshot {
  std::uint64_t encoder_passes = 0;
  std::uint64_t head_evals = 0;
};

CounterSnapshot counters_snapshot();

inline CounterSnapshot counters_delta(const CounterSnapshot& before, const CounterSnapshot& after) {
  return {after.encoder_passes - before.encoder_passes, after.head_evals - before.head_evals};
}

}  // namespace dse
