#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "frictionlab/ddm.hpp"

using namespace frictionlab;

namespace {

// Frozen from the closed form (1 - e^{-2vz}) / (1 - e^{-2va}) and the
// drifted mean-exit-time formula (a/v)(1 - e^{-2vz})/(1 - e^{-2va}) - z/v,
// cross-checked against a large Monte Carlo oracle before the build.
constexpr double kAcceptV1 = 0.8807970779778824;     // v=1, a=2, z=1, sigma=1
constexpr double kMeanTimeV2 = 0.48201379003790845;  // v=2, a=2, z=1, sigma=1

double empirical_accept(const DdmParams& p, std::size_t n, std::uint64_t seed,
                        double dt = kDefaultDt) {
    std::size_t accepts = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, rng_lane::kTrial, i);
        accepts += simulate_trial(p, dt, rng).choice == Choice::Accept ? 1 : 0;
    }
    return static_cast<double>(accepts) / static_cast<double>(n);
}

// Replays a shared Brownian path at two resolutions: the fine run consumes
// the recorded normals directly, the coarse run consumes consecutive pairs
// summed as (n1 + n2)/sqrt(2), i.e. the same motion sampled twice as
// coarsely. Bridge uniforms replay from a second recorded stream.
struct CoupledNoise {
    Rng gen;
    Rng aux;
    std::uint64_t aux_seed;
    std::vector<double> normals;
    std::size_t next_normal = 0;
    bool coarse = false;

    explicit CoupledNoise(std::uint64_t seed)
        : gen(seed), aux(seed ^ 0xabcdefULL), aux_seed(seed ^ 0xabcdefULL) {}

    void reset(bool coarse_mode) {
        next_normal = 0;
        coarse = coarse_mode;
        aux = Rng(aux_seed);
    }

    double raw() {
        if (next_normal == normals.size()) normals.push_back(gen.normal());
        return normals[next_normal++];
    }

    double normal() {
        if (!coarse) return raw();
        const double n1 = raw();
        const double n2 = raw();
        return (n1 + n2) / std::sqrt(2.0);
    }

    double uniform() { return aux.uniform(); }
};

} // namespace

TEST_CASE("parameter domain is enforced") {
    REQUIRE_THROWS_AS(DdmParams{0, -1, 0.5, 1, 0.3}.validate(), ParameterError);
    REQUIRE_THROWS_AS(DdmParams{0, 2, 0.0, 1, 0.3}.validate(), ParameterError);
    REQUIRE_THROWS_AS(DdmParams{0, 2, 2.0, 1, 0.3}.validate(), ParameterError);
    REQUIRE_THROWS_AS(DdmParams{0, 2, 1.0, 0.0, 0.3}.validate(), ParameterError);
    REQUIRE_THROWS_AS(DdmParams{0, 2, 1.0, 1, -0.1}.validate(), ParameterError);
    Rng rng(1);
    REQUIRE_THROWS_AS(simulate_trial(DdmParams{0, 2, 1, 1, 0.3}, 0.02, rng), ParameterError);
    REQUIRE_THROWS_AS(accept_probability(DdmParams{0, 2, 3, 1, 0.3}), ParameterError);
}

TEST_CASE("accept_probability closed forms") {
    REQUIRE(accept_probability(DdmParams{0, 2, 1, 1, 0.3}) == 0.5);
    REQUIRE(accept_probability(DdmParams{0, 2, 1.8, 1, 0.3}) == Catch::Approx(0.9).epsilon(1e-14));
    REQUIRE(accept_probability(DdmParams{1, 2, 1, 1, 0.3}) ==
            Catch::Approx(kAcceptV1).epsilon(1e-13));
    // the near-zero-drift branch stays continuous across the epsilon switch
    const double below = accept_probability(DdmParams{0.5e-8, 2, 1.2, 1, 0.3});
    const double above = accept_probability(DdmParams{2e-8, 2, 1.2, 1, 0.3});
    REQUIRE(below == Catch::Approx(0.6).margin(1e-7));
    REQUIRE(above == Catch::Approx(0.6).margin(1e-7));
    // extreme drift saturates without overflowing
    REQUIRE(accept_probability(DdmParams{500, 2, 1, 1, 0.3}) == Catch::Approx(1.0));
    REQUIRE(accept_probability(DdmParams{-500, 2, 1, 1, 0.3}) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("zero drift at midpoint accepts half the time") {
    const DdmParams p{0, 2, 1, 1, 0.3};
    const double share = empirical_accept(p, 100000, 11);
    REQUIRE(share == Catch::Approx(0.5).margin(0.005));
}

TEST_CASE("overwhelming positive drift always accepts") {
    const DdmParams p{10, 1, 0.5, 0.1, 0.3};
    std::size_t accepts = 0;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::substream(3, rng_lane::kTrial, i);
        accepts += simulate_trial(p, 1e-3, rng).choice == Choice::Accept ? 1 : 0;
    }
    REQUIRE(accepts == n);
}

TEST_CASE("moderate drift matches the closed form") {
    const DdmParams p{1, 2, 1, 1, 0.3};
    const double share = empirical_accept(p, 100000, 17);
    const double se = std::sqrt(kAcceptV1 * (1 - kAcceptV1) / 100000.0);
    REQUIRE(std::fabs(share - kAcceptV1) < 4.0 * se);
}

TEST_CASE("rt is never below the non-decision time") {
    const DdmParams p{0.5, 1.5, 0.4, 0.8, 0.25};
    for (std::size_t i = 0; i < 5000; ++i) {
        Rng rng = Rng::substream(23, rng_lane::kTrial, i);
        REQUIRE(simulate_trial(p, 1e-3, rng).rt >= p.t0);
    }
}

TEST_CASE("degenerate parameters trip the runaway guard") {
    DdmParams p{0, 2, 1, 1e-6, 0.3};
    p.validate();
    Rng rng(5);
    REQUIRE_THROWS_AS(simulate_trial(p, 1e-3, rng), RunawayTrialError);
}

TEST_CASE("mean decision time: zero-drift closed form") {
    const auto est = mean_decision_time(DdmParams{0, 2, 1, 1, 0.3});
    REQUIRE(est.exact);
    REQUIRE(est.seconds == 1.0);
    // boundary-adjacent start decays to zero
    const auto tiny = mean_decision_time(DdmParams{0, 2, 1e-7, 1, 0.3});
    REQUIRE(tiny.seconds < 1e-6);
}

TEST_CASE("mean decision time: drifted Monte Carlo estimate hits the oracle") {
    DecisionTimeOptions opts;
    opts.trials = 60000;
    opts.seed = 29;
    const auto est = mean_decision_time(DdmParams{2, 2, 1, 1, 0.3}, opts);
    REQUIRE_FALSE(est.exact);
    REQUIRE(est.std_error > 0.0);
    REQUIRE(est.trials == opts.trials);
    REQUIRE(std::fabs(est.seconds - kMeanTimeV2) < 4.0 * est.std_error + 2e-3);
}

TEST_CASE("simulate_dataset contracts") {
    const DdmParams p{1, 2, 1, 1, 0.3};
    REQUIRE_THROWS_AS(simulate_dataset(p, 0, "c", 0.5, 1), ParameterError);
    REQUIRE_THROWS_AS(simulate_dataset(p, 10, "c", 1.5, 1), ParameterError);

    const TrialSet a = simulate_dataset(p, 100, "cond", 0.7, 4242);
    const TrialSet b = simulate_dataset(p, 100, "cond", 0.7, 4242);
    REQUIRE(a == b);  // byte-level determinism
    REQUIRE(a.trials.size() == 100);
    REQUIRE(a.schema_version == kTrialSchemaVersion);
    for (const TrialRecord& tr : a.trials) {
        REQUIRE(tr.rt >= p.t0);
        REQUIRE(tr.condition_id == "cond");
    }

    const TrialSet big = simulate_dataset(p, 100000, "cond", 0.7, 77);
    std::size_t accepts = 0;
    for (const TrialRecord& tr : big.trials) accepts += tr.choice == Choice::Accept ? 1 : 0;
    const double share = static_cast<double>(accepts) / 100000.0;
    const double se = std::sqrt(kAcceptV1 * (1 - kAcceptV1) / 100000.0);
    REQUIRE(std::fabs(share - kAcceptV1) < 3.0 * se);
}

TEST_CASE("accept_probability is monotone in v and z") {
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(0.5, 3.0);
        const double z = rng.uniform(0.1, 0.9) * a;
        const double sigma = rng.uniform(0.5, 2.0);
        const double v = rng.uniform(-2.0, 2.0);
        const double dv = rng.uniform(0.01, 0.5);
        const double p0 = accept_probability(DdmParams{v, a, z, sigma, 0.3});
        const double p1 = accept_probability(DdmParams{v + dv, a, z, sigma, 0.3});
        REQUIRE(p1 > p0);
        const double dz = rng.uniform(0.01, 0.9 * (a - z));
        const double p2 = accept_probability(DdmParams{v, a, z + dz, sigma, 0.3});
        REQUIRE(p2 > p0);
    }
}

TEST_CASE("reflection symmetry holds to 1e-12") {
    Rng rng(37);
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(0.5, 3.0);
        const double z = rng.uniform(0.05, 0.95) * a;
        const double sigma = rng.uniform(0.5, 2.0);
        const double v = rng.uniform(-3.0, 3.0);
        const double p = accept_probability(DdmParams{v, a, z, sigma, 0.3});
        const double q = accept_probability(DdmParams{-v, a, a - z, sigma, 0.3});
        REQUIRE(std::fabs(p + q - 1.0) < 1e-12);
    }
}

TEST_CASE("Monte Carlo accept frequency converges over a random grid") {
    Rng grid(41);
    for (int i = 0; i < 5; ++i) {
        const double a = grid.uniform(1.0, 2.5);
        DdmParams p{grid.uniform(-1.5, 1.5), a, grid.uniform(0.2, 0.8) * a,
                    grid.uniform(0.7, 1.4), 0.3};
        const double truth = accept_probability(p);
        const double share = empirical_accept(p, 20000, 1000 + i);
        const double se = std::sqrt(truth * (1 - truth) / 20000.0);
        REQUIRE(std::fabs(share - truth) < 4.0 * se + 1e-4);
    }
}

TEST_CASE("halving dt barely moves the accept frequency (coupled paths)") {
    const DdmParams p{1, 2, 1, 1, 0.3};
    const std::size_t n = 100000;
    const double dt = 2e-3;
    std::size_t acc_fine = 0, acc_coarse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        CoupledNoise noise(900 + i);
        noise.reset(false);
        acc_fine += simulate_trial(p, dt / 2, noise).choice == Choice::Accept ? 1 : 0;
        noise.reset(true);
        acc_coarse += simulate_trial(p, dt, noise).choice == Choice::Accept ? 1 : 0;
    }
    const double f_fine = static_cast<double>(acc_fine) / n;
    const double f_coarse = static_cast<double>(acc_coarse) / n;
    const double se = std::sqrt(f_fine * (1.0 - f_fine) / n);
    REQUIRE(std::fabs(f_fine - f_coarse) < se);
}
