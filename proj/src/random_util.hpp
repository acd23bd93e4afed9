#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace qpulsar::detail {

// Unbiased integer in [0, n) by rejection; portable across standard libraries.
inline std::size_t uniform_below(std::mt19937_64 &rng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = rng();
    while (r >= limit) {
        r = rng();
    }
    return static_cast<std::size_t>(r % bound);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle(std::span<T> items, std::mt19937_64 &rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[uniform_below(rng, i)]);
    }
}

// First k entries become a uniform sample without replacement.
template <typename T>
void partial_shuffle(std::span<T> items, std::size_t k, std::mt19937_64 &rng) {
    for (std::size_t i = 0; i < k && i + 1 < items.size(); ++i) {
        std::swap(items[i], items[i + uniform_below(rng, items.size() - i)]);
    }
}

}  // namespace qpulsar::detail
