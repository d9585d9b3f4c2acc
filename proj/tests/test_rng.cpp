#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "frictionlab/rng.hpp"

using namespace frictionlab;

TEST_CASE("substreams are deterministic and independent of draw order") {
    Rng a = Rng::substream(42, rng_lane::kTrial, 7);
    Rng b = Rng::substream(42, rng_lane::kTrial, 7);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

    Rng c = Rng::substream(42, rng_lane::kTrial, 8);
    Rng d = Rng::substream(42, rng_lane::kScanpath, 7);
    Rng e = Rng::substream(43, rng_lane::kTrial, 7);
    Rng ref = Rng::substream(42, rng_lane::kTrial, 7);
    const std::uint64_t first = ref.next_u64();
    REQUIRE(c.next_u64() != first);
    REQUIRE(d.next_u64() != first);
    REQUIRE(e.next_u64() != first);
}

TEST_CASE("uniform stays inside the open unit interval") {
    Rng rng(123);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal draws match the standard moments") {
    Rng rng(7);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
        sum3 += x * x * x;
    }
    REQUIRE(std::fabs(sum / n) < 0.01);
    REQUIRE(std::fabs(sum2 / n - 1.0) < 0.02);
    REQUIRE(std::fabs(sum3 / n) < 0.05);
}

TEST_CASE("normal quantile inverts the normal CDF at reference points") {
    // Phi^-1(0.975) = 1.959964..., Phi^-1(0.5) = 0
    REQUIRE(std::fabs(detail::normal_quantile(0.5)) < 1e-15);
    REQUIRE(detail::normal_quantile(0.975) == Catch::Approx(1.9599639845400545).epsilon(1e-12));
    REQUIRE(detail::normal_quantile(0.025) == Catch::Approx(-1.9599639845400545).epsilon(1e-12));
    REQUIRE(detail::normal_quantile(1e-10) == Catch::Approx(-6.3613409024040557).epsilon(1e-9));
}

TEST_CASE("gamma and beta sampling have the right means") {
    Rng rng(99);
    const int n = 100000;
    double gsum = 0.0;
    for (int i = 0; i < n; ++i) gsum += rng.gamma(3.0);
    REQUIRE(gsum / n == Catch::Approx(3.0).margin(0.05));

    double bsum = 0.0;
    for (int i = 0; i < n; ++i) bsum += rng.beta(2.0, 6.0);
    REQUIRE(bsum / n == Catch::Approx(0.25).margin(0.01));

    double gsmall = 0.0;
    for (int i = 0; i < n; ++i) gsmall += rng.gamma(0.5);
    REQUIRE(gsmall / n == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("uniform_index is unbiased over small ranges") {
    Rng rng(5);
    std::vector<int> counts(5, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[rng.uniform_index(5)];
    for (int c : counts) REQUIRE(std::fabs(c / static_cast<double>(n) - 0.2) < 0.01);
}
