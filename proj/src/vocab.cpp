#include "dse/vocab.hpp"

#include <fstream>
#include <sstream>

#include "dse/error.hpp"

namespace dse {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    ids_.emplace(tokens_[i], static_cast<int>(i) + kNumReserved);
  }
}

Vocabulary Vocabulary::synthetic(std::size_t size) {
  if (size <= kNumReserved) throw ConfigError("synthetic vocabulary needs size > 4");
  std::vector<std::string> tokens;
  tokens.reserve(size - kNumReserved);
  for (std::size_t i = 0; i + kNumReserved < size; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "tok%04zu", i);
    tokens.emplace_back(buf);
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file: " + path);
  for (const auto& t : tokens_) out << t << "\n";
}

int Vocabulary::lookup(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_text(int id) const {
  static const std::string reserved[] = {"[PAD]", "[CLS]", "[SEP]", "[UNK]"};
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw InputError("token id " + std::to_string(id) + " out of range");
  }
  if (id < kNumReserved) return reserved[id];
  return tokens_[static_cast<std::size_t>(id - kNumReserved)];
}

std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab) {
  std::vector<int> ids;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) ids.push_back(vocab.lookup(tok));
  return ids;
}

std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token_text(ids[i]);
  }
  return out;
}

}  // namespace dse
