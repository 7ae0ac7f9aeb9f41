#pragma once

#include <cmath>
#include <cstdint>

namespace mfpa {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Per-path random stream derived from (seed, path index) by mixing, so a
// path's draws never depend on how paths are partitioned across workers.
// Draw counts per step are fixed (two uniforms per normal, one per
// Poisson), keeping streams aligned between policy variants under common
// random numbers.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t path_index, bool antithetic = false)
        : antithetic_(antithetic) {
        std::uint64_t s = seed;
        (void)detail::splitmix64(s);
        state_ = s ^ (0xD1B54A32D192ED03ULL * (path_index + 1));
        (void)detail::splitmix64(state_);
    }

    // Uniform on (0,1), never exactly 0 or 1.
    double uniform() {
        double u = (double(detail::splitmix64(state_) >> 11) + 0.5) * 0x1.0p-53;
        return antithetic_ ? 1.0 - u : u;
    }

    // Box-Muller; consumes exactly two uniforms.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Inversion by sequential search; consumes exactly one uniform.
    // Suitable for the small per-step means of this model.
    unsigned poisson(double mean) {
        if (mean <= 0.0) {
            (void)uniform();
            return 0;
        }
        double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        unsigned k = 0;
        while (u > cdf && k < 100000) {
            ++k;
            p *= mean / double(k);
            cdf += p;
        }
        return k;
    }

private:
    std::uint64_t state_;
    bool antithetic_;
};

}  // namespace mfpa
