#pragma once

#include <cstdint>
#include <vector>

#include "dse/tensor.hpp"

namespace dse {

// The one PRNG used by the whole project: xoshiro256** seeded through
// splitmix64, with Box-Muller for normal draws (the second value of each
// Box-Muller pair is cached). Identical seed gives an identical draw
// sequence on every platform; nothing here depends on libstdc++
// distribution internals.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  // Uniform integer in [0, bound); bound must be positive.
  std::size_t uniform_int(std::size_t bound);
  double normal(double mean = 0.0, double stddev = 1.0);

  Tensor normal_tensor(std::vector<std::size_t> shape, double stddev);

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_int(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dse
