#pragma once

// Deterministic hashing and sampling helpers. The standard distributions are
// implementation-defined, so everything that feeds an output file goes
// through these instead.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>

namespace thoughtcards {

inline constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                       std::uint64_t basis = 14695981039346656037ULL) noexcept {
    std::uint64_t h = basis;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for a per-item stream: hash(run_seed, key).
inline constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key) noexcept {
    std::uint64_t state = run_seed ^ fnv1a64(key);
    return splitmix64(state);
}

/// SplitMix64 as a UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return splitmix64(state_); }

private:
    std::uint64_t state_;
};

/// Uniform integer in [0, n) by rejection; n must be positive.
template <class Gen>
std::size_t uniform_index(Gen& gen, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = static_cast<std::uint64_t>(gen());
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

/// Uniform double in [0, 1) with 53 bits.
template <class Gen>
double uniform01(Gen& gen) {
    return static_cast<double>(static_cast<std::uint64_t>(gen()) >> 11) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller.
template <class Gen>
double standard_normal(Gen& gen) {
    double u1 = uniform01(gen);
    const double u2 = uniform01(gen);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Fisher-Yates over the first `k` positions: afterwards items[0..k) is a
/// uniform sample without replacement.
template <class T, class Gen>
void partial_shuffle(std::span<T> items, std::size_t k, Gen& gen) {
    for (std::size_t i = 0; i < k && i + 1 < items.size(); ++i) {
        std::size_t j = i + uniform_index(gen, items.size() - i);
        std::swap(items[i], items[j]);
    }
}

}  // namespace thoughtcards
