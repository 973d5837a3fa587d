#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace evnet {

/// Independent generator for a named component (e.g. "init", "noise",
/// "shuffle") derived from one run seed, so that changing how much one
/// component draws never shifts another component's stream.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace evnet
