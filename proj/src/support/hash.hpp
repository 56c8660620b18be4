#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ca::hash {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

/// FNV-1a 64. Content-addressing (run ids, config hashes) needs a hash
/// that is stable across processes and builds, which std::hash does not
/// guarantee.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t state = kFnvOffset) {
  for (char c : data) {
    state ^= static_cast<unsigned char>(c);
    state *= kFnvPrime;
  }
  return state;
}

std::string to_hex(std::uint64_t value);

std::string digest_hex(std::string_view data);

}  // namespace ca::hash
