#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mnlb {

// Uniform draw in [0, 1) with 53-bit resolution. We map the raw engine output
// ourselves because std::uniform_real_distribution is not guaranteed to
// produce the same stream on every standard library, and recorded sweeps must
// replay bit-identically anywhere.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic sub-stream seed from a master seed plus coordinates
// (gamma index, instance, horizon, ...). The mixing chain is fixed;
// changing it invalidates previously recorded experiment output.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x51f15eedULL;
    for (std::uint64_t p : parts) {
        h = splitmix64(h ^ splitmix64(p));
    }
    return h;
}

}  // namespace mnlb
