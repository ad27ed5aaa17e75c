#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace concierge {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, substream); results never depend on
/// the order in which streams are created.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  return Rng(seq);
}

inline std::size_t uniform_below(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace concierge
