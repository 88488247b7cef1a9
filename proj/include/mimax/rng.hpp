// Deterministic random primitives. std::shuffle and the std distributions
// are implementation-defined, so anything that must reproduce bit-for-bit
// across platforms goes through these helpers instead.

#ifndef MIMAX_RNG_HPP
#define MIMAX_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace mimax {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(Rng &rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % n;
}

// Fisher-Yates over indices 0..n-1.
inline std::vector<std::size_t> random_permutation(Rng &rng, std::size_t n) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

// Index draw from unnormalized nonnegative weights.
inline std::size_t weighted_index(Rng &rng, const std::vector<double> &weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform_unit(rng) * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        cum += weights[i];
        if (u < cum) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
}

}  // namespace mimax

#endif  // MIMAX_RNG_HPP
