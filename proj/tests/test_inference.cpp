#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "frictionlab/ddm.hpp"
#include "frictionlab/inference.hpp"

using namespace frictionlab;

namespace {

TrialSet make_set(double v, double beta, std::size_t n, std::uint64_t seed,
                  double a = 2.0, double sigma = 1.0, double t0 = 0.3) {
    return simulate_dataset(DdmParams::from_beta(v, a, beta, sigma, t0), n, "sim", 0.5, seed);
}

FitConfig quick_cfg(std::uint64_t seed) {
    FitConfig cfg;
    cfg.warmup = 1200;
    cfg.samples = 2500;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("fit_subject enforces the trial floor") {
    const TrialSet tiny = make_set(1.0, 0.5, 10, 1);
    REQUIRE_THROWS_AS(fit_subject(tiny, Priors{}, FitConfig{}), InsufficientDataError);
}

TEST_CASE("simulate-then-fit recovers (v, beta) inside the credible intervals") {
    const double true_v = 1.5, true_beta = 0.5;
    const TrialSet set = make_set(true_v, true_beta, 2000, 101);
    const SubjectPosterior post = fit_subject(set, Priors{}, quick_cfg(7));
    REQUIRE(post.v.ci_lo < true_v);
    REQUIRE(post.v.ci_hi > true_v);
    REQUIRE(post.beta.ci_lo < true_beta);
    REQUIRE(post.beta.ci_hi > true_beta);
    REQUIRE(post.acceptance_rate > 0.05);
    REQUIRE(post.acceptance_rate < 0.95);
    // credible intervals stay inside the parameter domains
    REQUIRE(post.beta.ci_lo > 0.0);
    REQUIRE(post.beta.ci_hi < 1.0);
}

TEST_CASE("prior-only sampling reproduces the prior") {
    TrialSet empty;
    FitConfig cfg = quick_cfg(11);
    cfg.min_trials = 0;
    cfg.samples = 4000;
    const Priors priors;
    const SubjectPosterior post = fit_subject(empty, priors, cfg);
    // v ~ Normal(0, 2^2), beta ~ Beta(2, 2): mean 0 / 0.5, sd 2 / 0.2236
    const double se_v = priors.v_sd / std::sqrt(post.ess_v);
    REQUIRE(std::fabs(post.v.mean - 0.0) < 2.0 * se_v + 0.05);
    const double beta_sd = std::sqrt(2.0 * 2.0 / (16.0 * 5.0));
    const double se_b = beta_sd / std::sqrt(post.ess_beta);
    REQUIRE(std::fabs(post.beta.mean - 0.5) < 2.0 * se_b + 0.02);
    REQUIRE(post.v.sd == Catch::Approx(priors.v_sd).margin(0.25));
}

TEST_CASE("extreme bias with near-zero effort is recovered as such") {
    const TrialSet set = make_set(0.05, 0.9, 2000, 201);
    const SubjectPosterior post = fit_subject(set, Priors{}, quick_cfg(13));
    // posterior mass of beta above 0.75
    std::size_t above = 0;
    for (const PosteriorDraw& d : post.draws) above += d.beta > 0.75 ? 1 : 0;
    REQUIRE(static_cast<double>(above) / static_cast<double>(post.draws.size()) > 0.8);
    REQUIRE(std::fabs(post.v.mean) < 0.3);
}

TEST_CASE("identical seeds give identical posterior summaries") {
    const TrialSet set = make_set(0.8, 0.6, 300, 301);
    const SubjectPosterior a = fit_subject(set, Priors{}, quick_cfg(5));
    const SubjectPosterior b = fit_subject(set, Priors{}, quick_cfg(5));
    REQUIRE(a.v.mean == b.v.mean);
    REQUIRE(a.beta.sd == b.beta.sd);
    REQUIRE(a.acceptance_rate == b.acceptance_rate);
}

TEST_CASE("a frozen sampler reports its diagnostics failure") {
    const TrialSet set = make_set(1.0, 0.5, 200, 401);
    FitConfig cfg = quick_cfg(17);
    cfg.adapt = false;
    cfg.init_step_v = 80.0;  // essentially every proposal lands in measure-zero land
    cfg.init_step_beta = 80.0;
    REQUIRE_THROWS_AS(fit_subject(set, Priors{}, cfg), DiagnosticsError);
}

TEST_CASE("mechanism discrimination: equal accept rates, disjoint beta intervals") {
    // (beta=0.85, low v) vs (beta=0.5, high v) tuned to the same accept share
    const TrialSet biased = make_set(0.13, 0.85, 1200, 501);
    const TrialSet effortful = make_set(1.0, 0.5, 1200, 502);
    const SubjectPosterior post_b = fit_subject(biased, Priors{}, quick_cfg(19));
    const SubjectPosterior post_e = fit_subject(effortful, Priors{}, quick_cfg(23));
    REQUIRE(post_b.beta.ci_lo > post_e.beta.ci_hi);  // disjoint
    REQUIRE(std::fabs(post_e.v.mean) > std::fabs(post_b.v.mean));
}

TEST_CASE("decouple_report categorizes the three regimes") {
    const TrialSet biased = make_set(0.05, 0.9, 2000, 601);
    const DecoupleReport r1 = decouple_report(fit_subject(biased, Priors{}, quick_cfg(29)));
    REQUIRE(r1.verdict == DecoupleVerdict::BiasDominated);

    const TrialSet effortful = make_set(2.0, 0.5, 2000, 602);
    const DecoupleReport r2 = decouple_report(fit_subject(effortful, Priors{}, quick_cfg(31)));
    REQUIRE(r2.verdict == DecoupleVerdict::EffortDominated);

    SubjectPosterior neutral;
    neutral.beta.mean = 0.5;
    neutral.v.mean = 0.0;
    REQUIRE(decouple_report(neutral).verdict == DecoupleVerdict::Mixed);
}

TEST_CASE("hierarchical fit: group mean covers truth and shrinkage holds") {
    // 8 subjects from group mean v = 1.0, sd 0.3
    std::vector<TrialSet> cohort;
    Rng group_rng(71);
    for (int s = 0; s < 8; ++s) {
        const double v_s = 1.0 + 0.3 * group_rng.normal();
        const double beta_s = detail::inv_logit(0.0 + 0.4 * group_rng.normal());
        cohort.push_back(make_set(v_s, beta_s, 400, 700 + s));
    }
    HierConfig cfg;
    cfg.seed = 37;
    const GroupPosterior post = fit_hierarchical(cohort, GroupPriors{}, cfg);
    REQUIRE(post.v_location.ci_lo < 1.0);
    REQUIRE(post.v_location.ci_hi > 1.0);
    REQUIRE(post.v_scale.mean > 0.0);
    for (const SubjectPosterior& sp : post.subjects) {
        REQUIRE(sp.beta.ci_lo > 0.0);
        REQUIRE(sp.beta.ci_hi < 1.0);
    }
}

TEST_CASE("replicated data collapses the group scale toward its prior floor") {
    const TrialSet shared = make_set(1.0, 0.6, 400, 801);
    std::vector<TrialSet> replicated(6, shared);
    HierConfig cfg;
    cfg.seed = 41;
    const GroupPosterior same = fit_hierarchical(replicated, GroupPriors{}, cfg);

    std::vector<TrialSet> spread;
    for (int s = 0; s < 6; ++s) spread.push_back(make_set(-1.0 + 0.8 * s, 0.5, 400, 810 + s));
    const GroupPosterior hetero = fit_hierarchical(spread, GroupPriors{}, cfg);

    REQUIRE(same.v_scale.mean < 0.5 * hetero.v_scale.mean);
    REQUIRE(same.v_scale.mean < 0.3);
}

TEST_CASE("fit_hierarchical needs at least three subjects") {
    std::vector<TrialSet> two{make_set(1, 0.5, 100, 901), make_set(1, 0.5, 100, 902)};
    REQUIRE_THROWS_AS(fit_hierarchical(two, GroupPriors{}, HierConfig{}), InsufficientDataError);
}

TEST_CASE("hierarchical estimates beat independent fits on a synthetic cohort") {
    std::vector<TrialSet> cohort;
    std::vector<double> truth;
    Rng group_rng(93);
    const int subjects = 20;
    for (int s = 0; s < subjects; ++s) {
        const double v_s = 0.8 + 0.25 * group_rng.normal();
        truth.push_back(v_s);
        cohort.push_back(make_set(v_s, 0.5, 120, 950 + s));  // deliberately small n
    }
    HierConfig hcfg;
    hcfg.seed = 43;
    const GroupPosterior hier = fit_hierarchical(cohort, GroupPriors{}, hcfg);

    double mse_hier = 0.0, mse_indep = 0.0;
    for (int s = 0; s < subjects; ++s) {
        FitConfig icfg = quick_cfg(1000 + s);
        icfg.min_trials = 0;
        const SubjectPosterior indep = fit_subject(cohort[s], Priors{}, icfg);
        mse_indep += (indep.v.mean - truth[s]) * (indep.v.mean - truth[s]);
        mse_hier += (hier.subjects[s].v.mean - truth[s]) * (hier.subjects[s].v.mean - truth[s]);
    }
    REQUIRE(mse_hier < mse_indep);
}
