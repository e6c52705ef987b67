#pragma once

// Counter-based Philox4x32-10 generator with explicit stream splitting.
//
// A draw is a pure function of (seed, stream, position), so paths generated
// on different threads, or in a different order, are bit-identical.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace superconc {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr int kRounds = 10;

    static constexpr Counter block(Counter ctr, Key key) noexcept {
        for (int r = 0; r < kRounds; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Packs a (cell, index) pair into one 64-bit stream identifier.
/// `index` must be below 2^40.
constexpr std::uint64_t stream_id(std::uint32_t cell, std::uint64_t index) noexcept {
    return (std::uint64_t{cell} << 40) ^ index;
}

/// Sequential uniform and standard-normal draws from one Philox stream.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    /// Raw 64-bit words; two per Philox block.
    std::uint64_t next_u64() noexcept {
        if (word_ == 2) refill();
        return words_[word_++];
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double next_uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Box-Muller; the second variate of each pair is cached.
    double next_normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::span<double> out) noexcept {
        for (double& v : out) v = next_normal();
    }

    /// Uniform integer in [0, bound) by rejection (unbiased).
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= limit) return x % bound;
        }
    }

private:
    void refill() noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                      static_cast<std::uint32_t>(block_ >> 32),
                                      static_cast<std::uint32_t>(stream_),
                                      static_cast<std::uint32_t>(stream_ >> 32)};
        const auto out = Philox4x32::block(ctr, key_);
        words_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        words_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        ++block_;
        word_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> words_{};
    int word_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; derives independent seeds from a base seed and a tag.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace superconc
