#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace daqc {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97f4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seeded random stream. All stochastic code derives its stream from one
/// master seed plus a stream name, so results are reproducible across
/// platforms (mt19937_64 output is standard-defined and the distributions
/// below avoid the implementation-defined std:: ones).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    static Rng substream(std::uint64_t master, std::string_view name) {
        return Rng(splitmix64(master ^ fnv1a64(name)));
    }
    static Rng substream(std::uint64_t master, std::string_view name, std::uint64_t index) {
        return Rng(splitmix64(splitmix64(master ^ fnv1a64(name)) + index));
    }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    /// Box-Muller; deterministic independent of platform libm quirks.
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + stddev * r * std::cos(a);
    }

    /// One Latin hypercube sample set: rows are points in [0,1)^dim.
    std::vector<std::vector<double>> latin_hypercube(int points, int dim) {
        std::vector<std::vector<double>> out(points, std::vector<double>(dim));
        std::vector<int> perm(points);
        for (int k = 0; k < dim; ++k) {
            for (int i = 0; i < points; ++i) perm[i] = i;
            for (int i = points - 1; i > 0; --i) {
                const int j = static_cast<int>(uniform_int(static_cast<std::uint64_t>(i) + 1));
                std::swap(perm[i], perm[j]);
            }
            for (int i = 0; i < points; ++i)
                out[i][k] = (perm[i] + uniform()) / points;
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace daqc
