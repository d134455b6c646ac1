#pragma once

#include <cstdint>
#include <random>

namespace pottspair {

// Uniform double in [0,1) built from the top 53 bits of the engine output,
// so draws are reproducible across standard libraries.
inline double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// SplitMix64 mixer, used to derive independent engine seeds from a base seed
// and a stream index without any correlation between streams.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(uint64_t seed, uint64_t stream) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0x9e3779b97f4a7c15ull + 1)));
}

}  // namespace pottspair
