#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace dse {

// Whitespace-token vocabulary with four reserved ids. File format: one
// token per line, UTF-8; line number + 4 = id.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kCls = 1;
  static constexpr int kSep = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumReserved = 4;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  // "tok0000", "tok0001", ... filling a vocabulary of total size `size`
  // (reserved ids included).
  static Vocabulary synthetic(std::size_t size);

  static Vocabulary load(const std::string& path);
  void save(const std::string& path) const;

  // Total id space, reserved ids included.
  std::size_t size() const { return tokens_.size() + kNumReserved; }
  // Never fails: unknown tokens map to UNK.
  int lookup(const std::string& token) const;
  const std::string& token_text(int id) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Whitespace split, then vocabulary lookup. Empty text gives an empty list.
std::vector<int> tokenize(const std::string& text, const Vocabulary& vocab);

// Inverse of tokenize for real (non-reserved) ids; used when writing
// synthetic datasets.
std::string detokenize(const std::vector<int>& ids, const Vocabulary& vocab);

}  // namespace dse
