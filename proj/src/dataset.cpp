#include "dse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dse/error.hpp"
#include "dse/rng.hpp"

namespace dse {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("dataset line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

DatasetFileContent read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::string header;
  if (!std::getline(in, header)) throw InputError("dataset is empty: " + path);

  DatasetFileContent content;
  std::istringstream hs(header);
  std::string magic, version, field;
  hs >> magic >> version;
  if (magic != "#" || version != "dse-dataset") {
    throw InputError("dataset header missing '# dse-dataset' magic: " + path);
  }
  bool have_task = false;
  while (hs >> field) {
    const std::size_t eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "task") {
      content.task = task_from_name(value);
      have_task = true;
    } else if (key == "logits") {
      content.logit_dim = static_cast<std::size_t>(std::stoul(value));
    }
  }
  if (!have_task) throw InputError("dataset header does not declare a task: " + path);

  const std::size_t expected_cols = 3 + content.logit_dim;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != expected_cols) {
      throw InputError("dataset line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected_cols) + " columns, found " +
                       std::to_string(cols.size()));
    }
    DatasetRow row;
    row.sentence_a = cols[0];
    row.sentence_b = cols[1];
    row.label = parse_double(cols[2], line_no);
    if (task_is_classification(content.task)) {
      const double classes = static_cast<double>(task_output_dim(content.task));
      if (row.label != std::floor(row.label) || row.label < 0.0 || row.label >= classes) {
        throw InputError("dataset line " + std::to_string(line_no) + ": label " + cols[2] +
                         " is not a valid class index for task " + task_name(content.task));
      }
    }
    for (std::size_t i = 3; i < cols.size(); ++i) {
      row.logits.push_back(parse_double(cols[i], line_no));
    }
    content.rows.push_back(std::move(row));
  }
  return content;
}

void write_dataset_file(const std::string& path, const DatasetFileContent& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  out << "# dse-dataset v1 task=" << task_name(content.task) << " logits=" << content.logit_dim
      << "\n";
  for (const auto& row : content.rows) {
    out << row.sentence_a << "\t" << row.sentence_b << "\t" << format_double(row.label);
    for (double l : row.logits) out << "\t" << format_double(l);
    out << "\n";
  }
}

std::vector<TrainingExample> to_examples(const DatasetFileContent& content,
                                         const Vocabulary& vocab) {
  std::vector<TrainingExample> out;
  out.reserve(content.rows.size());
  for (const auto& row : content.rows) {
    TrainingExample ex;
    ex.sentence_a = tokenize(row.sentence_a, vocab);
    ex.sentence_b = tokenize(row.sentence_b, vocab);
    ex.label = row.label;
    if (!row.logits.empty()) ex.teacher_logits = Tensor::row(row.logits);
    out.push_back(std::move(ex));
  }
  return out;
}

std::pair<std::vector<TrainingExample>, TaskKind> parse_dataset(const std::string& path,
                                                                const Vocabulary& vocab) {
  const DatasetFileContent content = read_dataset_file(path);
  return {to_examples(content, vocab), content.task};
}

double multiset_jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, std::size_t> ca, cb;
  for (int t : a) ++ca[t];
  for (int t : b) ++cb[t];
  std::size_t inter = 0, uni = 0;
  for (const auto& [tok, na] : ca) {
    const auto it = cb.find(tok);
    const std::size_t nb = it == cb.end() ? 0 : it->second;
    inter += std::min(na, nb);
    uni += std::max(na, nb);
  }
  for (const auto& [tok, nb] : cb) {
    if (!ca.count(tok)) uni += nb;
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

// Topic supports over the non-reserved token pool. Supports are laid out
// with stride pool/(topics+1) and width 2*stride, so adjacent topics
// overlap by half and topics two or more apart are disjoint.
struct TopicLayout {
  std::size_t stride = 0;
  std::size_t width = 0;
};

TopicLayout topic_layout(std::size_t pool, std::size_t topics) {
  TopicLayout l;
  l.stride = pool / (topics + 1);
  l.width = 2 * l.stride;
  if (l.stride == 0) throw ConfigError("gen_synthetic: vocabulary too small for topic count");
  return l;
}

std::vector<int> sample_sentence(SeededRng& rng, const SyntheticConfig& cfg, std::size_t topic,
                                 const TopicLayout& layout) {
  const std::size_t len = cfg.min_len + rng.uniform_int(cfg.max_len - cfg.min_len + 1);
  std::vector<int> ids(len);
  for (auto& id : ids) {
    const std::size_t off = topic * layout.stride + rng.uniform_int(layout.width);
    id = static_cast<int>(Vocabulary::kNumReserved + off);
  }
  return ids;
}

std::vector<int> sample_uniform_sentence(SeededRng& rng, const SyntheticConfig& cfg,
                                         std::size_t pool) {
  const std::size_t len = cfg.min_len + rng.uniform_int(cfg.max_len - cfg.min_len + 1);
  std::vector<int> ids(len);
  for (auto& id : ids) id = static_cast<int>(Vocabulary::kNumReserved + rng.uniform_int(pool));
  return ids;
}

}  // namespace

DatasetFileContent gen_synthetic(const SyntheticConfig& cfg, const Vocabulary& vocab) {
  if (cfg.size < 10) throw ConfigError("gen_synthetic: size must be >= 10");
  if (cfg.min_len == 0 || cfg.min_len > cfg.max_len) {
    throw ConfigError("gen_synthetic: bad sentence length range");
  }
  if (vocab.size() < cfg.vocab_size) throw ConfigError("gen_synthetic: vocabulary too small");
  const std::size_t pool = cfg.vocab_size - Vocabulary::kNumReserved;
  const TopicLayout layout = topic_layout(pool, cfg.topics);
  SeededRng rng(cfg.seed);

  DatasetFileContent content;
  content.task = cfg.task;
  content.rows.reserve(cfg.size);
  for (std::size_t i = 0; i < cfg.size; ++i) {
    std::vector<int> a, b;
    double label = 0.0;
    switch (cfg.task) {
      case TaskKind::kBinary: {
        const std::size_t ta = rng.uniform_int(cfg.topics);
        const bool same = rng.uniform_int(2) == 1;
        std::size_t tb = ta;
        if (!same) {
          // Disjoint support: at least two strides away.
          do {
            tb = rng.uniform_int(cfg.topics);
          } while (tb + 2 > ta && ta + 2 > tb);
        }
        a = sample_sentence(rng, cfg, ta, layout);
        b = sample_sentence(rng, cfg, tb, layout);
        label = same ? 1.0 : 0.0;
        break;
      }
      case TaskKind::kMulticlass: {
        const std::size_t cls = rng.uniform_int(3);
        const std::size_t ta = rng.uniform_int(cfg.topics);
        std::size_t tb = ta;
        if (cls == 2) {
          tb = ta;  // same support
        } else if (cls == 1) {
          // Overlapping support: an adjacent topic.
          if (ta == 0)
            tb = 1;
          else if (ta == cfg.topics - 1)
            tb = ta - 1;
          else
            tb = rng.uniform_int(2) == 1 ? ta + 1 : ta - 1;
        } else {
          do {
            tb = rng.uniform_int(cfg.topics);
          } while (tb + 2 > ta && ta + 2 > tb);
        }
        a = sample_sentence(rng, cfg, ta, layout);
        b = sample_sentence(rng, cfg, tb, layout);
        label = static_cast<double>(cls);
        break;
      }
      case TaskKind::kRegression: {
        a = sample_uniform_sentence(rng, cfg, pool);
        if (rng.uniform() < 0.1) {
          b = a;  // guarantees label-1.0 coverage
        } else {
          // Keep a random prefix of a, refill the rest.
          b = a;
          const std::size_t keep = rng.uniform_int(a.size() + 1);
          for (std::size_t j = keep; j < b.size(); ++j) {
            b[j] = static_cast<int>(Vocabulary::kNumReserved + rng.uniform_int(pool));
          }
          rng.shuffle(b);
        }
        label = multiset_jaccard(a, b);
        break;
      }
    }
    DatasetRow row;
    row.sentence_a = detokenize(a, vocab);
    row.sentence_b = detokenize(b, vocab);
    row.label = label;
    content.rows.push_back(std::move(row));
  }
  return content;
}

}  // namespace dse
