#pragma once

#include <cmath>
#include <cstdint>

#include "frictionlab/errors.hpp"

namespace frictionlab {

namespace detail {

// splitmix64 finalizer; used both to expand seeds and to mix substream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// Wichura's PPND16 rational approximation to the standard normal quantile.
// One uniform in, one normal out; keeps every draw replayable.
inline double normal_quantile(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

} // namespace detail

// xoshiro256++ stream seeded through splitmix64. Substreams are derived by
// hashing (root seed, lane, index), so any trial/chain/cell can draw from
// its own stream regardless of scheduling order; serial and parallel
// execution therefore consume identical randomness.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = detail::splitmix64(sm);
    }

    static Rng substream(std::uint64_t root_seed, std::uint64_t lane, std::uint64_t index) {
        std::uint64_t h = root_seed;
        std::uint64_t k = detail::splitmix64(h) ^ (lane * 0xA24BAED4963EE407ULL);
        std::uint64_t h2 = k;
        k = detail::splitmix64(h2) ^ (index * 0x9FB21C651E98DF25ULL);
        std::uint64_t h3 = k;
        return Rng(detail::splitmix64(h3));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() { return detail::normal_quantile(uniform()); }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Marsaglia-Tsang; shape < 1 handled by boosting.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw ParameterError("gamma shape must be > 0");
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, vc;
            do {
                x = normal();
                vc = 1.0 + c * x;
            } while (vc <= 0.0);
            vc = vc * vc * vc;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * vc;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - vc + std::log(vc))) return d * vc;
        }
    }

    double beta(double alpha, double b) {
        const double x = gamma(alpha);
        const double y = gamma(b);
        return x / (x + y);
    }

private:
    std::uint64_t state_[4];
};

// Lane tags for substream derivation; every consumer of randomness in the
// harness draws from exactly one lane so streams never collide.
namespace rng_lane {
inline constexpr std::uint64_t kTrial = 1;      // DDM path noise
inline constexpr std::uint64_t kScanpath = 2;   // AOI sequences + dwells
inline constexpr std::uint64_t kAutonomic = 3;  // pupil/PFC draws
inline constexpr std::uint64_t kHesitation = 4;
inline constexpr std::uint64_t kAiLabel = 5;    // AI-correctness Bernoulli
inline constexpr std::uint64_t kDebate = 6;     // agent stance draws
inline constexpr std::uint64_t kChain = 7;      // MCMC chains
inline constexpr std::uint64_t kMisc = 8;
} // namespace rng_lane

inline const char* kRngSchemeDescription =
    "xoshiro256++ substreams keyed by splitmix64(root_seed, lane, index)";

} // namespace frictionlab
