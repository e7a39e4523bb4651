#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scidnet {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a, used to turn stage names into 64-bit tags at compile time.
constexpr std::uint64_t stage_tag(std::string_view name) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed splitting rule shared by every randomized stage:
/// child = splitmix64(root XOR tag XOR index).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag,
                                    std::uint64_t index = 0) {
  return splitmix64(root ^ tag ^ index);
}

namespace tags {
inline constexpr std::uint64_t kBootstrap = stage_tag("bootstrap");
inline constexpr std::uint64_t kReplication = stage_tag("replication");
inline constexpr std::uint64_t kSplit = stage_tag("split");
inline constexpr std::uint64_t kNetInit = stage_tag("net-init");
inline constexpr std::uint64_t kBatches = stage_tag("batches");
inline constexpr std::uint64_t kSimulate = stage_tag("simulate");
inline constexpr std::uint64_t kModels = stage_tag("models");
inline constexpr std::uint64_t kBaseline = stage_tag("baseline");
}  // namespace tags

}  // namespace scidnet
