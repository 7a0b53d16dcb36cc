#pragma once

// Seeded random streams. Every consumer derives its own stream from
// (seed, round, purpose) so toggling one random feature never shifts another.

#include <cstdint>
#include <random>

namespace camvo {

using Engine = std::mt19937_64;

enum class StreamPurpose : std::uint64_t {
    shuffle = 1,
    monte_carlo = 2,
    synth_weights = 3,
    synth_rounds = 4,
    synth_labels = 5,
    generic = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1342543de82ef95ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t round, StreamPurpose purpose) {
    return derive_seed(seed, round, static_cast<std::uint64_t>(purpose));
}

inline Engine make_engine(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Engine(seq);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), unbiased by rejection.
inline std::uint64_t uniform_index(Engine& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

}  // namespace camvo
