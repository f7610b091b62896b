#include "dse/counters.hpp"

namespace dse {

OpCounters& op_counters() {
  static OpCounters counters;
  return counters;
}

CounterSnapshot counters_snapshot() {
  return {op_counters().encoder_passes.load(), op_counters().head_evals.load()};
}

}  // namespace dse
