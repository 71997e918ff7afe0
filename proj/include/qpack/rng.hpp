#pragma once

#include <cmath>
#include <cstdint>

// Deterministic random streams. Every stochastic routine in qpack derives its
// stream from an explicit seed via splitmix64, so results are reproducible
// across runs and independent of worker count or scheduling order.

namespace qpack {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive an independent child seed for task `index` of a parent stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Small deterministic generator (xorshift-star core, splitmix-seeded).
/// Implemented in full here so sequences never depend on the standard
/// library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        state_ = splitmix64(s);
        if (state_ == 0) state_ = 0x106689d45497fdb5ULL;
        have_gauss_ = false;
        gauss_cache_ = 0.0;
    }

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    /// Uniform in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Modulo with rejection to keep the draw unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    /// Standard normal via polar Box-Muller.
    double gauss() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        gauss_cache_ = v * f;
        have_gauss_ = true;
        return u * f;
    }

    double gauss(double mean, double sigma) { return mean + sigma * gauss(); }

    /// Exponential with unit mean.
    double exponential() { return -std::log(1.0 - uniform()); }

private:
    std::uint64_t state_;
    bool have_gauss_;
    double gauss_cache_;
};

}  // namespace qpack
