#pragma once

#include <cstdint>
#include <string>

namespace dse {

// FNV-1a 64. Used for checkpoint integrity checksums, index fingerprints
// and manifest artifact digests.
struct Fnv1a64 {
  std::uint64_t state = 0xCBF29CE484222325ULL;

  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state ^= p[i];
      state *= 0x100000001B3ULL;
    }
  }
  std::uint64_t digest() const { return state; }
};

std::string hex_u64(std::uint64_t v);

// Digest of a whole file's bytes, as "fnv1a64:<hex>".
std::string file_checksum(const std::string& path);

}  // namespace dse
