/**
 * @file rng.hpp
 * @brief Seed derivation for reproducible, independently perturbable streams.
 *
 * Every stochastic mechanism in a run draws from its own engine, seeded from
 * (master seed, run index, purpose). Toggling one mechanism never shifts the
 * draws seen by another.
 */
#pragma once

#include <cstdint>
#include <random>

namespace netdiv {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

enum class Stream : std::uint64_t {
    Vulnerability = 1,
    Coloring = 2,
    Catalog = 3,
    InitialCompromise = 4,
    Detector = 5,
    RedeployChoice = 6,
    ProactiveSample = 7,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run_index,
                                    Stream purpose) noexcept {
    return mix64(mix64(mix64(master) ^ run_index) ^ static_cast<std::uint64_t>(purpose));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t run_index, Stream purpose) {
    return Rng{derive_seed(master, run_index, purpose)};
}

}  // namespace netdiv
