#pragma once

#include <cstdint>
#include <random>

namespace locsketch {

/// Every stochastic operation takes an explicit engine; nothing is global.
using Rng = std::mt19937_64;

/// Derive an independent stream for sub-task `index` of a run seeded with `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32U),
                      0x6c6f6373U};
    return Rng(seq);
}

}  // namespace locsketch
