#pragma once

#include <cstdint>
#include <cstddef>
#include <string>

namespace phasebind {

/// FNV-1a 64-bit running hash.
class Fnv1a64 {
 public:
  Fnv1a64& update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ull;
    }
    return *this;
  }

  Fnv1a64& update(const std::string& s) { return update(s.data(), s.size()); }

  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  return Fnv1a64().update(data, len).digest();
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace phasebind
