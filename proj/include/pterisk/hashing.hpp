#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace pterisk {

// FNV-1a, 64-bit.
inline uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<uint64_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// splitmix64 finalizer; full avalanche on a 64-bit state.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// SHA-256 hex digest of a byte string (OpenSSL-backed).
std::string sha256_hex(std::string_view bytes);

}  // namespace pterisk
