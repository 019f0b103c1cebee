#pragma once

#include <cstdint>

// Seed derivation. Every random stream in the library is derived from one master
// seed through this mixer, so a run is fully reproducible from (master, stream, index)
// and independent streams never share state.

namespace leofl::rng {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    std::uint64_t s = mix64(master);
    s = mix64(s ^ stream);
    s = mix64(s ^ index);
    return s;
}

} // namespace leofl::rng
