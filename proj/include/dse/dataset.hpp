#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dse/task.hpp"
#include "dse/vocab.hpp"

namespace dse {

// One TSV row: sentence_a, sentence_b, label, optional teacher logits.
struct DatasetRow {
  std::string sentence_a;
  std::string sentence_b;
  double label = 0.0;
  std::vector<double> logits;  // empty unless the file carries cached scores
};

// In-memory image of a dataset file. On disk: a header line
// "# dse-dataset v1 task=<kind> logits=<n>" followed by tab-separated
// rows with 3 or 3+n columns.
struct DatasetFileContent {
  TaskKind task = TaskKind::kBinary;
  std::size_t logit_dim = 0;
  std::vector<DatasetRow> rows;
};

DatasetFileContent read_dataset_file(const std::string& path);
void write_dataset_file(const std::string& path, const DatasetFileContent& content);

std::vector<TrainingExample> to_examples(const DatasetFileContent& content,
                                         const Vocabulary& vocab);

// parse_dataset = read + tokenize.
std::pair<std::vector<TrainingExample>, TaskKind> parse_dataset(const std::string& path,
                                                                const Vocabulary& vocab);

struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::size_t size = 100;
  TaskKind task = TaskKind::kBinary;
  std::size_t vocab_size = 512;  // total id space, reserved ids included
  std::size_t topics = 8;
  std::size_t min_len = 3;
  std::size_t max_len = 8;
};

// Deterministic topic-model pair generator. Classification labels encode
// topic agreement (binary: same/different; multiclass: disjoint /
// overlapping / same topic supports); regression labels are the multiset
// Jaccard similarity of the two token lists.
DatasetFileContent gen_synthetic(const SyntheticConfig& cfg, const Vocabulary& vocab);

// Multiset Jaccard over token ids, in [0, 1]; 1.0 for identical lists.
double multiset_jaccard(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace dse
