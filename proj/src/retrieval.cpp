#include "dse/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dse/checkpoint.hpp"
#include "dse/counters.hpp"
#include "dse/error.hpp"
#include "dse/rng.hpp"

namespace dse {

namespace {

constexpr char kIndexMagic[8] = {'D', 'S', 'E', 'I', 'D', 'X', '1', '\n'};

std::size_t resolve_rank_logit(int rank_logit, std::size_t n) {
  if (rank_logit < 0) return n - 1;
  if (static_cast<std::size_t>(rank_logit) >= n) {
    throw ConfigError("rank logit " + std::to_string(rank_logit) + " out of range for n=" +
                      std::to_string(n));
  }
  return static_cast<std::size_t>(rank_logit);
}

Tensor index_row(const EmbeddingIndex& index, std::size_t i) {
  Tensor row({1, index.dim});
  for (std::size_t j = 0; j < index.dim; ++j) row[j] = index.matrix.at(i, j);
  return row;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

EmbeddingIndex build_index(StudentModel& student, const std::vector<std::vector<int>>& catalog) {
  if (catalog.empty()) throw InputError("build_index: empty catalog");
  EmbeddingIndex index;
  index.count = catalog.size();
  index.dim = student.embedding_dim();
  index.matrix = Tensor({index.count, index.dim});
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const Tensor e = embed_sentence(student, catalog[i]);
    for (std::size_t j = 0; j < index.dim; ++j) index.matrix.at(i, j) = e[j];
  }
  index.fingerprint = model_fingerprint(student);
  return index;
}

void save_index(const EmbeddingIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write index: " + path);
  out.write(kIndexMagic, sizeof(kIndexMagic));
  const std::string header = nlohmann::json{{"N", index.count},
                                            {"d", index.dim},
                                            {"fingerprint", index.fingerprint}}
                                 .dump();
  const std::uint32_t len = static_cast<std::uint32_t>(header.size());
  unsigned char len_bytes[4];
  for (int i = 0; i < 4; ++i) len_bytes[i] = static_cast<unsigned char>(len >> (8 * i));
  out.write(reinterpret_cast<const char*>(len_bytes), 4);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (std::size_t i = 0; i < index.matrix.size(); ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(index.matrix[i]);
    unsigned char b[8];
    for (int t = 0; t < 8; ++t) b[t] = static_cast<unsigned char>(bits >> (8 * t));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  if (!out) throw IoError("short write on index: " + path);
}

EmbeddingIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kIndexMagic, 8) != 0) {
    throw IoError("not a DSE index: " + path);
  }
  unsigned char len_bytes[4];
  in.read(reinterpret_cast<char*>(len_bytes), 4);
  if (in.gcount() != 4) throw IoError("index truncated: " + path);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(len_bytes[i]) << (8 * i);
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (static_cast<std::uint32_t>(in.gcount()) != len) throw IoError("index truncated: " + path);
  const nlohmann::json j = nlohmann::json::parse(header);
  EmbeddingIndex index;
  index.count = j.at("N").get<std::size_t>();
  index.dim = j.at("d").get<std::size_t>();
  index.fingerprint = j.at("fingerprint").get<std::string>();
  index.matrix = Tensor({index.count, index.dim});
  for (std::size_t i = 0; i < index.matrix.size(); ++i) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (in.gcount() != 8) throw IoError("index truncated: " + path);
    std::uint64_t bits = 0;
    for (int t = 0; t < 8; ++t) bits |= static_cast<std::uint64_t>(b[t]) << (8 * t);
    index.matrix[i] = std::bit_cast<double>(bits);
  }
  return index;
}

PairwiseResult offline_pairwise(StudentModel& student, TeacherModel& teacher,
                                const std::vector<std::vector<int>>& catalog, PairwiseMode mode,
                                int rank_logit) {
  if (catalog.empty()) throw InputError("offline_pairwise: empty catalog");
  const std::size_t n = catalog.size();
  PairwiseResult result;
  result.scores = Tensor({n, n});
  const CounterSnapshot before = counters_snapshot();
  if (mode == PairwiseMode::kTeacher) {
    const std::size_t logit = resolve_rank_logit(rank_logit, teacher.output_dim());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        result.scores.at(i, j) = teacher_score(teacher, catalog[i], catalog[j])[logit];
  } else {
    const std::size_t logit = resolve_rank_logit(rank_logit, student.output_dim());
    std::vector<Tensor> embeddings;
    embeddings.reserve(n);
    for (const auto& sent : catalog) embeddings.push_back(embed_sentence(student, sent));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        result.scores.at(i, j) = similarity_head(student, embeddings[i], embeddings[j])[logit];
  }
  const CounterSnapshot delta = counters_delta(before, counters_snapshot());
  result.encoder_passes = delta.encoder_passes;
  result.head_evals = delta.head_evals;
  return result;
}

std::vector<std::pair<std::size_t, double>> online_query(const EmbeddingIndex& index,
                                                         StudentModel& student,
                                                         const std::vector<int>& query,
                                                         std::size_t k, int rank_logit) {
  if (k < 1 || k > index.count) {
    throw InputError("online_query: k=" + std::to_string(k) + " out of range for N=" +
                     std::to_string(index.count));
  }
  const std::size_t logit = resolve_rank_logit(rank_logit, student.output_dim());
  const Tensor q = embed_sentence(student, query);
  std::vector<std::pair<std::size_t, double>> scored;
  scored.reserve(index.count);
  for (std::size_t i = 0; i < index.count; ++i) {
    scored.emplace_back(i, similarity_head(student, q, index_row(index, i))[logit]);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  scored.resize(k);
  return scored;
}

std::vector<std::vector<int>> synthetic_catalog(std::size_t n, std::uint64_t seed,
                                                std::size_t vocab_size, std::size_t min_len,
                                                std::size_t max_len) {
  SeededRng rng(seed);
  const std::size_t pool = vocab_size - 4;
  std::vector<std::vector<int>> catalog(n);
  for (auto& sent : catalog) {
    sent.resize(min_len + rng.uniform_int(max_len - min_len + 1));
    for (auto& id : sent) id = static_cast<int>(4 + rng.uniform_int(pool));
  }
  return catalog;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, TeacherModel& teacher,
                              StudentModel& student) {
  if (cfg.scenario != "offline" && cfg.scenario != "online") {
    throw ConfigError("benchmark scenario must be 'offline' or 'online'");
  }
  if (cfg.n < 1) throw ConfigError("benchmark requires n >= 1");
  const std::size_t vocab = student.encoder.config.vocab_size;
  BenchmarkReport report;
  report.scenario = cfg.scenario;
  report.n = cfg.n;

  if (cfg.scenario == "offline") {
    const auto catalog = synthetic_catalog(cfg.n, cfg.seed, vocab, cfg.min_len, cfg.max_len);
    // Warmup, untimed.
    (void)teacher_score(teacher, catalog[0], catalog[0]);
    {
      const Tensor e = embed_sentence(student, catalog[0]);
      (void)similarity_head(student, e, e);
    }

    CounterSnapshot before = counters_snapshot();
    double t0 = now_seconds();
    const std::size_t tl = resolve_rank_logit(cfg.rank_logit, teacher.output_dim());
    volatile double sink = 0.0;
    for (std::size_t i = 0; i < cfg.n; ++i)
      for (std::size_t j = 0; j < cfg.n; ++j)
        sink = teacher_score(teacher, catalog[i], catalog[j])[tl];
    report.teacher_seconds = now_seconds() - t0;
    report.teacher_encoder_passes = counters_delta(before, counters_snapshot()).encoder_passes;

    before = counters_snapshot();
    t0 = now_seconds();
    std::vector<Tensor> embeddings;
    embeddings.reserve(cfg.n);
    for (const auto& sent : catalog) embeddings.push_back(embed_sentence(student, sent));
    report.dse_embed_seconds = now_seconds() - t0;
    const std::size_t sl = resolve_rank_logit(cfg.rank_logit, student.output_dim());
    t0 = now_seconds();
    for (std::size_t i = 0; i < cfg.n; ++i)
      for (std::size_t j = 0; j < cfg.n; ++j)
        sink = similarity_head(student, embeddings[i], embeddings[j])[sl];
    report.dse_head_seconds = now_seconds() - t0;
    const CounterSnapshot delta = counters_delta(before, counters_snapshot());
    report.dse_encoder_passes = delta.encoder_passes;
    report.dse_head_evals = delta.head_evals;
    (void)sink;
  } else {
    // Catalog embeddings are assumed precomputed in the online scenario;
    // only the query-time work is measured.
    const auto catalog = synthetic_catalog(cfg.n, cfg.seed, vocab, cfg.min_len, cfg.max_len);
    const auto query = synthetic_catalog(1, cfg.seed ^ 0x51AF3B7C9D2E8F01ULL, vocab, cfg.min_len,
                                         cfg.max_len)[0];
    const EmbeddingIndex index = build_index(student, catalog);
    // Warmup, untimed.
    (void)teacher_score(teacher, query, catalog[0]);
    {
      const Tensor e = embed_sentence(student, query);
      (void)similarity_head(student, e, index_row(index, 0));
    }

    CounterSnapshot before = counters_snapshot();
    double t0 = now_seconds();
    const std::size_t tl = resolve_rank_logit(cfg.rank_logit, teacher.output_dim());
    volatile double sink = 0.0;
    for (std::size_t i = 0; i < cfg.n; ++i)
      sink = teacher_score(teacher, query, catalog[i])[tl];
    report.teacher_seconds = now_seconds() - t0;
    report.teacher_encoder_passes = counters_delta(before, counters_snapshot()).encoder_passes;

    before = counters_snapshot();
    const std::size_t sl = resolve_rank_logit(cfg.rank_logit, student.output_dim());
    t0 = now_seconds();
    const Tensor q = embed_sentence(student, query);
    report.dse_embed_seconds = now_seconds() - t0;
    t0 = now_seconds();
    for (std::size_t i = 0; i < cfg.n; ++i)
      sink = similarity_head(student, q, index_row(index, i))[sl];
    report.dse_head_seconds = now_seconds() - t0;
    const CounterSnapshot delta = counters_delta(before, counters_snapshot());
    report.dse_encoder_passes = delta.encoder_passes;
    report.dse_head_evals = delta.head_evals;
    (void)sink;
  }
  report.speedup = report.teacher_seconds / (report.dse_embed_seconds + report.dse_head_seconds);
  return report;
}

nlohmann::json report_to_json(const BenchmarkReport& r) {
  return nlohmann::json{{"scenario", r.scenario},
                        {"N", r.n},
                        {"teacher_seconds", r.teacher_seconds},
                        {"dse_embed_seconds", r.dse_embed_seconds},
                        {"dse_head_seconds", r.dse_head_seconds},
                        {"speedup", r.speedup},
                        {"teacher_encoder_passes", r.teacher_encoder_passes},
                        {"dse_encoder_passes", r.dse_encoder_passes},
                        {"dse_head_evals", r.dse_head_evals}};
}

std::string report_to_table(const BenchmarkReport& r) {
  std::ostringstream os;
  char line[160];
  os << "scenario=" << r.scenario << " N=" << r.n << "\n";
  std::snprintf(line, sizeof(line), "%-18s %-16s %-12s %-16s %s\n", "Model", "Speedup factor",
                "Time (s)", "Encoder passes", "Head evals");
  os << line;
  std::snprintf(line, sizeof(line), "%-18s %-16s %-12.4f %-16llu %s\n", "Teacher", "1",
                r.teacher_seconds, static_cast<unsigned long long>(r.teacher_encoder_passes),
                "0");
  os << line;
  std::snprintf(line, sizeof(line), "%-18s %-16s %-12.4f %-16s %s\n", "DSE (psi phase)", "-",
                r.dse_embed_seconds, std::to_string(r.dse_encoder_passes).c_str(), "-");
  os << line;
  std::snprintf(line, sizeof(line), "%-18s %-16s %-12.4f %-16s %s\n", "DSE (f phase)", "-",
                r.dse_head_seconds, "-", std::to_string(r.dse_head_evals).c_str());
  os << line;
  std::snprintf(line, sizeof(line), "%-18s %-16.1f %-12.4f %-16s %s\n", "DSE", r.speedup,
                r.dse_embed_seconds + r.dse_head_seconds, "-", "-");
  os << line;
  return os.str();
}

}  // namespace dse
