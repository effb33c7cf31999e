#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace genscore {

// Stream purposes for counter-based seeding.
enum class StreamPurpose : std::uint64_t {
  kDataGeneration = 1,
  kBootstrapFull = 2,
  kBootstrapSubset = 3,
  kBootstrap = 4,
};

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for the stream identified by (seed, counters...). Depends only on the
// values, never on execution order.
constexpr std::uint64_t stream_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t h = mix64(seed);
  for (const std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::mt19937_64 make_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> counters) {
  return std::mt19937_64(stream_seed(seed, counters));
}

}  // namespace genscore
