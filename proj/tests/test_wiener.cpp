#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "frictionlab/ddm.hpp"
#include "frictionlab/wiener.hpp"

using namespace frictionlab;

TEST_CASE("config domain checks") {
    WienerLikelihoodConfig cfg;
    cfg.series_terms = 5;
    REQUIRE_THROWS_AS(cfg.validate(), ParameterError);
    cfg = {};
    cfg.time_floor = 0.0;
    REQUIRE_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("density is zero at and below the non-decision time") {
    const DdmParams p{1, 2, 1, 1, 0.3};
    REQUIRE(wiener_fpt_density(p, 0.3, Choice::Accept) == 0.0);
    REQUIRE(wiener_fpt_density(p, 0.1, Choice::Reject) == 0.0);
    REQUIRE(wiener_fpt_density(p, 0.3005, Choice::Accept) == 0.0);  // below the floor
    REQUIRE(wiener_fpt_density(p, 1.0, Choice::Accept) > 0.0);
}

TEST_CASE("exit densities integrate to one and split at the accept probability") {
    const DdmParams fixed{1, 2, 1, 1, 0.3};
    auto check = [](const DdmParams& p) {
        const ExitTimeIntegrals m = integrate_exit_densities(p);
        REQUIRE(std::fabs(m.total() - 1.0) < 1e-3);
        REQUIRE(std::fabs(m.accept_mass - accept_probability(p)) < 1e-3);
    };
    check(fixed);

    Rng rng(71);
    for (int i = 0; i < 10; ++i) {
        const double a = rng.uniform(0.8, 3.0);
        check(DdmParams{rng.uniform(-2.5, 2.5), a, rng.uniform(0.15, 0.85) * a,
                        rng.uniform(0.5, 2.0), 0.3});
    }
}

TEST_CASE("density curve matches a Monte Carlo RT histogram (CDF gap)") {
    const DdmParams p{1, 2, 1, 1, 0.3};
    const std::size_t n = 100000;
    std::vector<double> rts;
    rts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::substream(333, rng_lane::kTrial, i);
        rts.push_back(simulate_trial(p, 5e-4, rng).rt);
    }
    std::sort(rts.begin(), rts.end());

    const double t_lo = p.t0 + 1e-3, t_hi = p.t0 + 12.0;
    const std::size_t points = 4000;
    const std::vector<double> cdf = exit_time_cdf_grid(p, t_lo, t_hi, points);
    double max_gap = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) /
                                    static_cast<double>(points - 1);
        const auto it = std::upper_bound(rts.begin(), rts.end(), t);
        const double emp = static_cast<double>(it - rts.begin()) / static_cast<double>(n);
        max_gap = std::max(max_gap, std::fabs(cdf[i] - emp));
    }
    REQUIRE(max_gap < 0.012);
}

TEST_CASE("log_likelihood preconditions and sentinel") {
    const DdmParams p{1, 2, 1, 1, 0.3};
    TrialSet empty;
    REQUIRE_THROWS_AS(log_likelihood(empty, p), InsufficientDataError);

    TrialSet impossible;
    impossible.trials.push_back(TrialRecord{Choice::Accept, 0.2, false, "", 0});  // rt < t0
    REQUIRE(log_likelihood(impossible, p) == kImpossibleLogLik);
}

TEST_CASE("mode log-likelihood dominates a far tail") {
    const DdmParams p{1, 2, 1, 1, 0.3};
    // locate the accept-side mode on a grid
    double mode_t = 0.0, mode_f = -1.0;
    for (double t = 0.31; t < 5.0; t += 0.001) {
        const double f = wiener_fpt_density(p, t, Choice::Accept);
        if (f > mode_f) {
            mode_f = f;
            mode_t = t;
        }
    }
    TrialSet at_mode, at_tail;
    at_mode.trials.push_back(TrialRecord{Choice::Accept, mode_t, false, "", 0});
    at_tail.trials.push_back(TrialRecord{Choice::Accept, mode_t + 20.0, false, "", 0});
    REQUIRE(log_likelihood(at_mode, p) > log_likelihood(at_tail, p));
}

TEST_CASE("log_likelihood equals an independent product-of-densities oracle") {
    const DdmParams p{0.7, 2.2, 1.3, 1.1, 0.3};
    TrialSet set;
    Rng rng(55);
    for (std::size_t i = 0; i < 10; ++i) {
        Rng trial = Rng::substream(888, rng_lane::kTrial, i);
        TrialRecord rec = simulate_trial(p, 1e-3, trial);
        set.trials.push_back(rec);
    }
    const double ll = log_likelihood(set, p);
    // independent re-summation straight off the density function
    double oracle = 0.0;
    for (const TrialRecord& tr : set.trials)
        oracle += std::log(wiener_fpt_density(p, tr.rt, tr.choice));
    REQUIRE(ll == Catch::Approx(oracle).margin(1e-9));
    (void)rng;
}

TEST_CASE("cached evaluator agrees with the direct density path") {
    const DdmParams base{0.0, 2.0, 1.0, 1.0, 0.3};
    std::vector<double> rts{0.8, 1.2, 0.5, 2.5, 0.45};
    std::vector<Choice> choices{Choice::Accept, Choice::Reject, Choice::Accept,
                                Choice::Reject, Choice::Accept};
    WienerLikelihood lik(rts, choices, base.a, base.sigma, base.t0);
    for (double v : {-1.0, 0.0, 0.8}) {
        for (double beta : {0.3, 0.5, 0.7}) {
            double direct = 0.0;
            DdmParams p{v, base.a, beta * base.a, base.sigma, base.t0};
            for (std::size_t i = 0; i < rts.size(); ++i)
                direct += std::log(wiener_fpt_density(p, rts[i], choices[i]));
            REQUIRE(lik(v, beta) == Catch::Approx(direct).margin(1e-9));
        }
    }
    REQUIRE(lik(0.0, 1.5) == kImpossibleLogLik);
}
