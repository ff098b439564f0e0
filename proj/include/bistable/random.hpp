// Counter-based random streams
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace bistable {

// =============================================================================
// Hashing helpers for stream identifiers
// =============================================================================

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL; // FNV-1a offset basis
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t hash_combine(std::uint64_t h) { return h; }

template <typename... Rest>
constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t next, Rest... rest) {
    return hash_combine(splitmix64(h ^ splitmix64(next)), static_cast<std::uint64_t>(rest)...);
}

// =============================================================================
// Philox4x32-10
// =============================================================================

/**
 * @brief Philox4x32-10 counter-based generator (Salmon et al., SC'11).
 *
 * The 64-bit key selects the stream, the 128-bit counter is split into a
 * 64-bit substream id (high half) and a 64-bit block position (low half).
 * Satisfies UniformRandomBitGenerator with 64-bit output.
 */
class Philox {
public:
    using result_type = std::uint64_t;

    Philox() : Philox(0, 0) {}
    Philox(std::uint64_t key, std::uint64_t substream) : key_{lo(key), hi(key)} {
        ctr_ = {0, 0, lo(substream), hi(substream)};
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (idx_ >= 2) {
            block_ = generate_block(ctr_, key_);
            increment();
            idx_ = 0;
        }
        const auto w = static_cast<result_type>(block_[2 * idx_]) |
                       (static_cast<result_type>(block_[2 * idx_ + 1]) << 32);
        ++idx_;
        return w;
    }

    /// Raw block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> generate_block(std::array<std::uint32_t, 4> ctr,
                                                       std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
    static constexpr std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

    void increment() {
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_{};
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 2;
};

/**
 * @brief Fans one root seed out to independent substreams.
 *
 * Stream ids are hashes of (tag, indices...), so a given shot or replica
 * always sees the same numbers regardless of scheduling order.
 */
class StreamFactory {
public:
    explicit StreamFactory(std::uint64_t seed) : seed_(seed) {}

    template <typename... Ix>
    Philox stream(std::string_view tag, Ix... indices) const {
        const auto id = hash_combine(hash_string(tag), static_cast<std::uint64_t>(indices)...);
        return Philox(splitmix64(seed_), id);
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

// =============================================================================
// Variates
// =============================================================================

/// Uniform double in [0, 1) with 53 random bits.
template <typename Rng>
double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Rng>
bool bernoulli(Rng &rng, double p) {
    return uniform01(rng) < p;
}

/// Exponential variate with the given rate; +inf when rate is zero.
template <typename Rng>
double exponential(Rng &rng, double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-uniform01(rng)) / rate;
}

} // namespace bistable
