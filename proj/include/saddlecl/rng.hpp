#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace saddlecl {

// mt19937_64 output is pinned by the standard; std::shuffle and the
// std::*_distribution classes are not. Everything that must reproduce
// bit-for-bit across toolchains goes through the helpers below.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    // splitmix64 scramble so nearby (seed, stream) pairs decorrelate
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Rng(z ^ (z >> 31));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller; one value per call keeps consumption patterns obvious.
inline double gaussian(Rng& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Index in [0, n). Modulo bias is irrelevant at these ranges.
inline std::size_t rng_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::swap(idx[i - 1], idx[rng_index(rng, i)]);
    }
    return idx;
}

// k distinct indices from [0, n), order arbitrary but deterministic.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx = shuffled_indices(n, rng);
    if (k < n) idx.resize(k);
    return idx;
}

}  // namespace saddlecl
