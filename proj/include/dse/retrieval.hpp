#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dse/student.hpp"
#include "dse/teacher.hpp"

namespace dse {

// Immutable catalog of precomputed sentence embeddings. Row i is exactly
// embed_sentence(catalog[i]) under the fingerprinted model; ids are
// 0..N-1 in input order.
struct EmbeddingIndex {
  std::size_t count = 0;
  std::size_t dim = 0;
  Tensor matrix;  // N x d
  std::string fingerprint;
};

EmbeddingIndex build_index(StudentModel& student, const std::vector<std::vector<int>>& catalog);

// Index file: magic "DSEIDX1", u32 JSON header length, JSON
// {"N":..,"d":..,"fingerprint":".."}, then N*d little-endian f64 row-major.
void save_index(const EmbeddingIndex& index, const std::string& path);
EmbeddingIndex load_index(const std::string& path);

enum class PairwiseMode { kTeacher, kDse };

struct PairwiseResult {
  Tensor scores;  // N x N, ranking logit per pair
  std::uint64_t encoder_passes = 0;
  std::uint64_t head_evals = 0;
};

// N x N pair scores over a catalog: teacher mode re-encodes every pair
// (N^2 encoder passes); dse mode embeds once per sentence and applies the
// head per pair (N passes + N^2 head evaluations). The diagonal is a
// valid pair and is included.
PairwiseResult offline_pairwise(StudentModel& student, TeacherModel& teacher,
                                const std::vector<std::vector<int>>& catalog, PairwiseMode mode,
                                int rank_logit = -1);

// One encoder pass for the query plus N head evaluations; top-k by score
// descending, ties broken by ascending id. rank_logit selects the scoring
// logit for multi-logit heads (-1 = last).
std::vector<std::pair<std::size_t, double>> online_query(const EmbeddingIndex& index,
                                                         StudentModel& student,
                                                         const std::vector<int>& query,
                                                         std::size_t k, int rank_logit = -1);

struct BenchmarkConfig {
  std::string scenario = "online";  // "offline" | "online"
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  int rank_logit = -1;
  std::size_t min_len = 3;
  std::size_t max_len = 8;
};

struct BenchmarkReport {
  std::string scenario;
  std::size_t n = 0;
  double teacher_seconds = 0.0;
  double dse_embed_seconds = 0.0;  // psi phase
  double dse_head_seconds = 0.0;   // f phase
  double speedup = 0.0;            // teacher / (embed + head)
  std::uint64_t teacher_encoder_passes = 0;
  std::uint64_t dse_encoder_passes = 0;
  std::uint64_t dse_head_evals = 0;
};

// Times both paths single-threaded with a monotonic clock after one
// untimed warmup pass of each; the catalog is generated from the seed.
BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, TeacherModel& teacher,
                              StudentModel& student);

nlohmann::json report_to_json(const BenchmarkReport& report);
// Aligned text table: speedup factor and phase times per path.
std::string report_to_table(const BenchmarkReport& report);

// Seeded synthetic catalog of token-id sentences for benchmarking.
std::vector<std::vector<int>> synthetic_catalog(std::size_t n, std::uint64_t seed,
                                                std::size_t vocab_size, std::size_t min_len,
                                                std::size_t max_len);

}  // namespace dse
