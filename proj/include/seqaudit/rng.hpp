#pragma once

#include <cstdint>

namespace seqaudit {

// Counter-based generator: every draw is a pure function of
// (seed, replication, step, coordinate). Replications can run on any
// thread in any order and still produce bit-identical streams.
//
// The mixer is the SplitMix64 finalizer, applied as a chain over the
// four key words so each word avalanches into the output.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t replication,
                                std::uint64_t step, std::uint64_t coordinate) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(replication));
    h = splitmix64(h ^ splitmix64(step));
    h = splitmix64(h ^ splitmix64(coordinate));
    return h;
}

// Uniform in [0, 1) from the top 53 bits.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t replication,
                            std::uint64_t step, std::uint64_t coordinate) {
    return static_cast<double>(keyed_bits(seed, replication, step, coordinate) >> 11) *
           0x1.0p-53;
}

} // namespace seqaudit
