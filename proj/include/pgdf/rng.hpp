#pragma once

#include <cstdint>
#include <random>

namespace pgdf {

/// splitmix64 step; used to derive independent sub-seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for a named stream. Streams with different ids are
/// decorrelated; the same (seed, id) always yields the same value.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
    return splitmix64(seed ^ splitmix64(stream_id + 0x51ed2701ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

} // namespace pgdf
