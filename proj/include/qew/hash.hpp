#pragma once

#include <cstdint>

// Counter-style keyed hashing: every random quantity in the project is a pure
// function of (seed, integer coordinates), so quenched fields need no storage
// and are safe under concurrent reads.

namespace qew {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Hash of a lattice cell (i, j) under a 64-bit key.
inline constexpr std::uint64_t cell_hash(std::uint64_t seed, std::int64_t i, std::int64_t j) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(i));
    h = splitmix64(h ^ static_cast<std::uint64_t>(j));
    return h;
}

// Map a hash to the open interval (0,1); never returns 0 or 1, so inverse
// CDFs stay finite.
inline constexpr double uniform01(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Independent child seeds (replica seeds, inner Monte Carlo streams, ...).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                           std::uint64_t stream) {
    return cell_hash(master, static_cast<std::int64_t>(index),
                     static_cast<std::int64_t>(stream));
}

} // namespace qew
