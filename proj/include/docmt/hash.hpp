#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace docmt {

std::string sha256_hex(std::string_view data);

constexpr uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace docmt
