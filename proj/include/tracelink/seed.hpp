#pragma once

#include <cstdint>
#include <string_view>

namespace tracelink {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s,
                                std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sub-seed for one pipeline stage: mix64(master ^ fnv1a64(stage)), then
/// folded with each index in turn (window, epoch, ...).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) {
  return mix64(master ^ fnv1a64(stage));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                    std::uint64_t index) {
  return mix64(derive_seed(master, stage) ^ mix64(index));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                                    std::uint64_t a, std::uint64_t b) {
  return mix64(derive_seed(master, stage, a) ^ mix64(b + 0x632be59bd9b4e019ULL));
}

}  // namespace tracelink
