#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

// Portable deterministic sampling helpers. std::mt19937_64's output sequence is
// pinned by the standard, but the std::*_distribution adaptors are not, so every
// value that ends up in a golden file or a persisted artifact must go through
// these instead.
namespace rrkit::detail {

/// Unbiased integer in [0, bound) via rejection sampling. bound > 0.
inline std::uint64_t bounded_u64(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % bound;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % bound;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double unit_real(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * unit_real(rng);
}

/// Standard normal via Box-Muller. Consumes two engine outputs.
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = unit_real(rng);
    while (u1 == 0.0) {
        u1 = unit_real(rng);
    }
    const double u2 = unit_real(rng);
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// k distinct indices sampled uniformly from [0, n), returned sorted ascending.
/// Partial Fisher-Yates; k <= n.
inline std::vector<std::size_t> sample_without_replacement(std::mt19937_64& rng,
                                                           std::size_t n,
                                                           std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) {
        pool[i] = i;
    }
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded_u64(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// round-half-away-from-zero, the rounding rule used for mask counts.
inline std::size_t round_half_away(double x) {
    return static_cast<std::size_t>(std::llround(x));
}

/// FNV-1a 64-bit over a byte range, optionally continuing a running hash.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<std::uint64_t>(p[i]);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace rrkit::detail
