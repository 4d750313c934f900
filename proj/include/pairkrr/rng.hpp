#pragma once

#include <cmath>
#include <cstdint>

namespace pairkrr {

/// Deterministic 64-bit generator (splitmix64). The full recipe is documented
/// in the README so randomized checks can be reproduced outside this codebase:
/// state += 0x9E3779B97F4A7C15; z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
/// z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1): top 53 bits scaled by 2^-53.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double next_uniform_open() { return 1.0 - next_uniform(); }

    /// Standard normal via Box-Muller: sqrt(-2 ln u1) * cos(2 pi u2).
    double next_normal() {
        const double u1 = next_uniform_open();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Log-uniform in [lo, hi].
    double next_log_uniform(double lo, double hi) {
        return lo * std::exp(next_uniform() * std::log(hi / lo));
    }

    /// Integer in [lo, hi] inclusive.
    std::uint64_t next_index(std::uint64_t lo, std::uint64_t hi) {
        return lo + next_u64() % (hi - lo + 1);
    }

private:
    std::uint64_t state_;
};

} // namespace pairkrr
