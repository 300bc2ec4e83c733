#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace simnet {

using Rng = std::mt19937_64;

// Fisher-Yates with explicit modulo sampling so shuffles are reproducible
// across standard-library implementations (std::shuffle is not).
template <typename T>
void deterministic_shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

inline std::vector<std::int64_t> shuffled_indices(std::int64_t n, Rng& rng) {
    std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    deterministic_shuffle(std::span<std::int64_t>(idx), rng);
    return idx;
}

// Derives a stream-specific seed so every subsystem draws from one root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace simnet
