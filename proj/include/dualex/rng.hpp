#pragma once

#include <cstdint>
#include <random>

namespace dualex {

// Every stochastic routine takes an explicit std::mt19937_64 stream so runs
// replay bit-for-bit from a seed. Streams for parallel/replicated work are
// derived from (seed, stream_index) through splitmix64 so they don't overlap
// trivially.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_index = 0) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(stream_index)));
}

}  // namespace dualex
