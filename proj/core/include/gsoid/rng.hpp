#pragma once

#include <cstdint>
#include <random>

namespace gsoid {

struct RngSeed {
    std::uint64_t seed = 0;
};

/// One round of the splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of trial `index` under `base`: base XOR splitmix64(index). Stable across versions.
constexpr RngSeed trial_seed(RngSeed base, std::uint64_t index) noexcept {
    return RngSeed{base.seed ^ splitmix64(index)};
}

/// Independent stream for a named pipeline stage of one trial.
constexpr RngSeed stage_seed(RngSeed trial, std::uint64_t stage) noexcept {
    return RngSeed{splitmix64(trial.seed ^ splitmix64(0xA5A5A5A5ULL + stage))};
}

using Rng = std::mt19937_64;

inline Rng make_rng(RngSeed s) { return Rng(s.seed); }

}  // namespace gsoid
