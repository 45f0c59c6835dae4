#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ttclass {

/// Seeded random source with a portable normal sampler.
///
/// std::normal_distribution is implementation-defined, which would make
/// seeded runs differ between standard libraries. We draw uniform 64-bit
/// words from std::mt19937_64 (bit-exact by the standard) and apply our
/// own Box-Muller transform instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is irrelevant for the sizes used here
        return engine_() % n;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    bool have_cached_{false};
    double cached_{0.0};
};

}  // namespace ttclass
