#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace amkm {

/// Identity string recorded in experiment metadata so runs can be reproduced.
/// The engine (mt19937_64) is bit-exact across platforms by the standard; the
/// derived draws below are implemented here because the standard library's
/// distributions are not portable.
inline constexpr const char* kRngAlgorithm = "mt19937_64/lemire-mask/fisher-yates/box-muller";

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of repetition `rep` under base seed `base`:
/// splitmix64(base + rep * 0x9E3779B97F4A7C15). Stated here so repetitions
/// can be reproduced (or run concurrently) without sharing generator state.
inline std::uint64_t derive_rep_seed(std::uint64_t base, std::size_t rep) {
    return splitmix64(base + static_cast<std::uint64_t>(rep) * 0x9E3779B97F4A7C15ULL);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound) via bitmask rejection (unbiased).
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
        if (bound == 1) return 0;
        std::uint64_t mask = ~0ULL >> __builtin_clzll(bound - 1);
        std::uint64_t r;
        do {
            r = engine_() & mask;
        } while (r >= bound);
        return r;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the log is finite.
        double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
        double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// k distinct indices from [0, population), partial Fisher-Yates order.
    std::vector<std::size_t> sample_without_replacement(std::size_t population, std::size_t k) {
        if (k > population) {
            throw std::invalid_argument("Rng::sample_without_replacement: k exceeds population");
        }
        std::vector<std::size_t> idx(population);
        for (std::size_t i = 0; i < population; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(population - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

    /// Full permutation of [0, n).
    std::vector<std::size_t> permutation(std::size_t n) { return sample_without_replacement(n, n); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace amkm
