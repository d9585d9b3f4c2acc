#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frictionlab/ddm.hpp"
#include "frictionlab/errors.hpp"
#include "frictionlab/rng.hpp"
#include "frictionlab/wiener.hpp"

namespace frictionlab {

struct Priors {
    double v_mean = 0.0;
    double v_sd = 2.0;
    double beta_a = 2.0;  // Beta(2, 2) over the relative start beta
    double beta_b = 2.0;

    void validate() const {
        if (!(v_sd > 0.0) || !(beta_a > 0.0) || !(beta_b > 0.0))
            throw ParameterError("improper priors");
    }
};

// Values the likelihood holds fixed while (v, beta) are estimated.
struct FixedDdm {
    double a = 2.0;
    double sigma = 1.0;
    double t0 = 0.3;
};

struct FitConfig {
    int warmup = 1500;        // adaptation phase, discarded
    int samples = 3000;       // retained draws
    int thin = 1;
    std::size_t min_trials = 50;
    double init_step_v = 0.25;
    double init_step_beta = 0.06;
    double target_accept = 0.30;  // inside the documented 20-50% band
    bool adapt = true;
    std::uint64_t seed = 0xf17beefULL;
    FixedDdm fixed;
    WienerLikelihoodConfig density;

    void validate() const {
        if (warmup < 0 || samples < 10 || thin < 1) throw ParameterError("bad sampler sizes");
        if (!(init_step_v > 0.0) || !(init_step_beta > 0.0))
            throw ParameterError("step sizes must be > 0");
    }
};

struct ParamSummary {
    double mean = 0.0;
    double sd = 0.0;
    double ci_lo = 0.0;  // central 95% credible interval
    double ci_hi = 0.0;
};

struct PosteriorDraw {
    double v = 0.0;
    double beta = 0.0;
    double log_post = 0.0;
};

struct SubjectPosterior {
    ParamSummary v;
    ParamSummary beta;
    double acceptance_rate = 0.0;
    double ess_v = 0.0;
    double ess_beta = 0.0;
    std::uint64_t seed = 0;
    std::vector<PosteriorDraw> draws;
};

namespace detail {

inline double normal_logpdf(double x, double mean, double sd) {
    const double d = (x - mean) / sd;
    return -0.5 * d * d - std::log(sd) - 0.9189385332046727;  // log sqrt(2 pi)
}

inline double beta_logpdf(double x, double a, double b) {
    if (!(x > 0.0) || !(x < 1.0)) return kImpossibleLogLik;
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log(1.0 - x) + std::lgamma(a + b) -
           std::lgamma(a) - std::lgamma(b);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double inv_logit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline ParamSummary summarize(std::vector<double> xs) {
    ParamSummary s;
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(xs.begin(), xs.end());
    auto quantile = [&](double q) {
        const double pos = q * (n - 1.0);
        const std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= xs.size()) return xs.back();
        const double frac = pos - static_cast<double>(i);
        return xs[i] * (1.0 - frac) + xs[i + 1] * frac;
    };
    s.ci_lo = quantile(0.025);
    s.ci_hi = quantile(0.975);
    return s;
}

// Effective sample size from the initial-positive-sequence autocorrelation sum.
inline double effective_sample_size(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 10) return static_cast<double>(n);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double c0 = 0.0;
    for (double x : xs) c0 += (x - mean) * (x - mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0.0) return static_cast<double>(n);
    double rho_sum = 0.0;
    for (std::size_t lag = 1; lag < n / 3; ++lag) {
        double c = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) c += (xs[i] - mean) * (xs[i + lag] - mean);
        c /= static_cast<double>(n);
        const double rho = c / c0;
        if (rho < 0.05) break;
        rho_sum += rho;
    }
    return static_cast<double>(n) / (1.0 + 2.0 * rho_sum);
}

} // namespace detail

// Random-walk Metropolis over (v, beta) with diminishing step adaptation
// during warmup. The likelihood term vanishes when the trial set is empty
// and min_trials permits it, which makes prior-only sampling available for
// sampler validation.
inline SubjectPosterior fit_subject(const TrialSet& set, const Priors& priors = {},
                                    const FitConfig& cfg = {}) {
    priors.validate();
    cfg.validate();
    if (set.trials.size() < cfg.min_trials)
        throw InsufficientDataError("fit_subject: " + std::to_string(set.trials.size()) +
                                    " trials < configured floor " +
                                    std::to_string(cfg.min_trials));

    std::optional<WienerLikelihood> lik;
    if (!set.trials.empty()) {
        std::vector<double> rts;
        std::vector<Choice> choices;
        for (const TrialRecord& tr : set.trials) {
            rts.push_back(tr.rt);
            choices.push_back(tr.choice);
        }
        lik.emplace(rts, choices, cfg.fixed.a, cfg.fixed.sigma, cfg.fixed.t0, cfg.density);
    }

    auto log_post = [&](double v, double beta) {
        const double lp = detail::normal_logpdf(v, priors.v_mean, priors.v_sd) +
                          detail::beta_logpdf(beta, priors.beta_a, priors.beta_b);
        if (lp <= kImpossibleLogLik) return kImpossibleLogLik;
        if (!lik) return lp;
        const double ll = (*lik)(v, beta);
        if (ll <= kImpossibleLogLik) return kImpossibleLogLik;
        return lp + ll;
    };

    Rng rng = Rng::substream(cfg.seed, rng_lane::kChain, 0);
    double v = priors.v_mean, beta = 0.5;
    double lp = log_post(v, beta);
    double log_sv = std::log(cfg.init_step_v), log_sb = std::log(cfg.init_step_beta);

    SubjectPosterior post;
    post.seed = cfg.seed;
    post.draws.reserve(static_cast<std::size_t>(cfg.samples));
    std::size_t kept_accepts = 0, kept_total = 0;

    const int total_iters = cfg.warmup + cfg.samples * cfg.thin;
    for (int iter = 0; iter < total_iters; ++iter) {
        const double vp = v + std::exp(log_sv) * rng.normal();
        const double bp = beta + std::exp(log_sb) * rng.normal();
        const double lpp = log_post(vp, bp);
        const bool accept = std::log(rng.uniform()) < lpp - lp;
        if (accept) {
            v = vp;
            beta = bp;
            lp = lpp;
        }
        if (iter < cfg.warmup) {
            if (cfg.adapt) {
                const double gain = 1.0 / std::pow(iter + 10.0, 0.7);
                const double delta = (accept ? 1.0 : 0.0) - cfg.target_accept;
                log_sv += gain * delta;
                log_sb += gain * delta;
            }
        } else {
            ++kept_total;
            kept_accepts += accept ? 1 : 0;
            if ((iter - cfg.warmup) % cfg.thin == 0)
                post.draws.push_back(PosteriorDraw{v, beta, lp});
        }
    }

    post.acceptance_rate = static_cast<double>(kept_accepts) / static_cast<double>(kept_total);
    if (post.acceptance_rate < 0.05 || post.acceptance_rate > 0.95)
        throw DiagnosticsError("fit_subject: post-adaptation acceptance rate " +
                               std::to_string(post.acceptance_rate) +
                               " outside [0.05, 0.95]; chain cannot be trusted");

    std::vector<double> vs, bs;
    vs.reserve(post.draws.size());
    bs.reserve(post.draws.size());
    for (const PosteriorDraw& d : post.draws) {
        vs.push_back(d.v);
        bs.push_back(d.beta);
    }
    post.v = detail::summarize(vs);
    post.beta = detail::summarize(bs);
    post.ess_v = detail::effective_sample_size(vs);
    post.ess_beta = detail::effective_sample_size(bs);
    return post;
}

// ---------------------------------------------------------------------------
// Hierarchical model: v_i ~ N(mu_v, tau_v^2), logit(beta_i) ~ N(mu_l, tau_l^2),
// sampled by Gibbs-within-Metropolis (conjugate normal / inverse-gamma group
// updates, random-walk Metropolis subject updates).
// ---------------------------------------------------------------------------

struct GroupPriors {
    double mu_v_mean = 0.0, mu_v_sd = 2.0;
    double mu_l_mean = 0.0, mu_l_sd = 1.5;
    // Inverse-gamma on the group variances; shape 2 keeps the mean finite.
    double var_shape = 2.0;
    double var_scale = 0.1;
};

struct HierConfig {
    int warmup = 800;
    int samples = 1500;
    std::size_t min_subjects = 3;
    std::size_t min_trials = 1;
    double init_step_v = 0.25;
    double init_step_beta = 0.25;  // logit scale
    double target_accept = 0.30;
    std::uint64_t seed = 0x91e6a6cULL;
    FixedDdm fixed;
    WienerLikelihoodConfig density;
};

struct GroupPosterior {
    ParamSummary v_location;        // mu_v
    ParamSummary v_scale;           // tau_v
    ParamSummary beta_location;     // inv_logit(mu_l), reported on the beta scale
    ParamSummary beta_scale_logit;  // tau_l, logit scale
    std::vector<SubjectPosterior> subjects;
    // sd of subject posterior means over posterior-mean group scale;
    // values below 1 indicate pooling toward the group mean.
    double dispersion_v = 0.0;
    double min_subject_acceptance = 0.0;
    double max_subject_acceptance = 0.0;
    std::uint64_t seed = 0;
};

inline GroupPosterior fit_hierarchical(const std::vector<TrialSet>& subjects,
                                       const GroupPriors& priors = {},
                                       const HierConfig& cfg = {}) {
    if (subjects.size() < cfg.min_subjects)
        throw InsufficientDataError("fit_hierarchical needs >= " +
                                    std::to_string(cfg.min_subjects) + " subjects");
    const std::size_t S = subjects.size();

    std::vector<WienerLikelihood> liks;
    liks.reserve(S);
    for (const TrialSet& set : subjects) {
        if (set.trials.size() < cfg.min_trials)
            throw InsufficientDataError("fit_hierarchical: subject below trial floor");
        std::vector<double> rts;
        std::vector<Choice> choices;
        for (const TrialRecord& tr : set.trials) {
            rts.push_back(tr.rt);
            choices.push_back(tr.choice);
        }
        liks.emplace_back(rts, choices, cfg.fixed.a, cfg.fixed.sigma, cfg.fixed.t0,
                          cfg.density);
    }

    Rng rng = Rng::substream(cfg.seed, rng_lane::kChain, 0);

    std::vector<double> v(S, 0.0), l(S, 0.0);  // subject drift / logit-beta
    std::vector<double> cached_ll(S);
    for (std::size_t i = 0; i < S; ++i) cached_ll[i] = liks[i](v[i], detail::inv_logit(l[i]));
    double mu_v = 0.0, var_v = 0.25, mu_l = 0.0, var_l = 0.25;
    std::vector<double> log_sv(S, std::log(cfg.init_step_v));
    std::vector<double> log_sl(S, std::log(cfg.init_step_beta));
    std::vector<std::size_t> accepts(S, 0), totals(S, 0);

    std::vector<double> mu_v_draws, tau_v_draws, mu_l_draws, tau_l_draws;
    std::vector<std::vector<PosteriorDraw>> subject_draws(S);

    const int total_iters = cfg.warmup + cfg.samples;
    for (int iter = 0; iter < total_iters; ++iter) {
        // subject-level Metropolis conditional on the group parameters
        for (std::size_t i = 0; i < S; ++i) {
            const double vp = v[i] + std::exp(log_sv[i]) * rng.normal();
            const double lp2 = l[i] + std::exp(log_sl[i]) * rng.normal();
            const double ll_new = liks[i](vp, detail::inv_logit(lp2));
            double delta;
            if (ll_new <= kImpossibleLogLik) {
                delta = kImpossibleLogLik;
            } else {
                const double prior_new = detail::normal_logpdf(vp, mu_v, std::sqrt(var_v)) +
                                         detail::normal_logpdf(lp2, mu_l, std::sqrt(var_l));
                const double prior_old = detail::normal_logpdf(v[i], mu_v, std::sqrt(var_v)) +
                                         detail::normal_logpdf(l[i], mu_l, std::sqrt(var_l));
                delta = ll_new + prior_new - (cached_ll[i] + prior_old);
            }
            const bool accept = std::log(rng.uniform()) < delta;
            if (accept) {
                v[i] = vp;
                l[i] = lp2;
                cached_ll[i] = ll_new;
            }
            if (iter < cfg.warmup) {
                const double gain = 1.0 / std::pow(iter + 10.0, 0.7);
                const double adj = gain * ((accept ? 1.0 : 0.0) - cfg.target_accept);
                log_sv[i] += adj;
                log_sl[i] += adj;
            } else {
                ++totals[i];
                accepts[i] += accept ? 1 : 0;
            }
        }

        // conjugate group updates: normal location, inverse-gamma variance
        auto update_group = [&](const std::vector<double>& xs, double prior_mean,
                                double prior_sd, double& mu, double& var) {
            const double n = static_cast<double>(S);
            double sum = 0.0;
            for (double x : xs) sum += x;
            const double prec = n / var + 1.0 / (prior_sd * prior_sd);
            const double mean = (sum / var + prior_mean / (prior_sd * prior_sd)) / prec;
            mu = mean + rng.normal() / std::sqrt(prec);
            double ss = 0.0;
            for (double x : xs) ss += (x - mu) * (x - mu);
            const double shape = priors.var_shape + 0.5 * n;
            const double scale = priors.var_scale + 0.5 * ss;
            var = scale / rng.gamma(shape);
        };
        update_group(v, priors.mu_v_mean, priors.mu_v_sd, mu_v, var_v);
        update_group(l, priors.mu_l_mean, priors.mu_l_sd, mu_l, var_l);

        if (iter >= cfg.warmup) {
            mu_v_draws.push_back(mu_v);
            tau_v_draws.push_back(std::sqrt(var_v));
            mu_l_draws.push_back(detail::inv_logit(mu_l));
            tau_l_draws.push_back(std::sqrt(var_l));
            for (std::size_t i = 0; i < S; ++i)
                subject_draws[i].push_back(
                    PosteriorDraw{v[i], detail::inv_logit(l[i]), cached_ll[i]});
        }
    }

    GroupPosterior post;
    post.seed = cfg.seed;
    post.v_location = detail::summarize(mu_v_draws);
    post.v_scale = detail::summarize(tau_v_draws);
    post.beta_location = detail::summarize(mu_l_draws);
    post.beta_scale_logit = detail::summarize(tau_l_draws);

    post.min_subject_acceptance = 1.0;
    post.max_subject_acceptance = 0.0;
    std::vector<double> subject_means;
    for (std::size_t i = 0; i < S; ++i) {
        SubjectPosterior sp;
        sp.seed = cfg.seed;
        sp.draws = subject_draws[i];
        std::vector<double> vs, bs;
        for (const PosteriorDraw& d : sp.draws) {
            vs.push_back(d.v);
            bs.push_back(d.beta);
        }
        sp.v = detail::summarize(vs);
        sp.beta = detail::summarize(bs);
        sp.ess_v = detail::effective_sample_size(vs);
        sp.ess_beta = detail::effective_sample_size(bs);
        sp.acceptance_rate =
            static_cast<double>(accepts[i]) / static_cast<double>(totals[i]);
        post.min_subject_acceptance =
            std::min(post.min_subject_acceptance, sp.acceptance_rate);
        post.max_subject_acceptance =
            std::max(post.max_subject_acceptance, sp.acceptance_rate);
        subject_means.push_back(sp.v.mean);
        post.subjects.push_back(std::move(sp));
    }
    if (post.min_subject_acceptance < 0.05 || post.max_subject_acceptance > 0.95)
        throw DiagnosticsError("fit_hierarchical: subject acceptance rate outside "
                               "[0.05, 0.95] after adaptation");

    double mean_of_means = 0.0;
    for (double m : subject_means) mean_of_means += m;
    mean_of_means /= static_cast<double>(S);
    double ss = 0.0;
    for (double m : subject_means) ss += (m - mean_of_means) * (m - mean_of_means);
    const double sd_means = std::sqrt(ss / std::max<double>(1.0, static_cast<double>(S - 1)));
    post.dispersion_v = post.v_scale.mean > 0.0 ? sd_means / post.v_scale.mean : 0.0;
    return post;
}

// ---------------------------------------------------------------------------
// Bias/effort decomposition of a posterior.
// ---------------------------------------------------------------------------

enum class DecoupleVerdict { BiasDominated, EffortDominated, Mixed };

inline const char* decouple_verdict_name(DecoupleVerdict v) {
    switch (v) {
        case DecoupleVerdict::BiasDominated: return "bias-dominated";
        case DecoupleVerdict::EffortDominated: return "effort-dominated";
        default: return "mixed";
    }
}

struct DecoupleThresholds {
    double bias_cut = 0.15;   // |mean beta - 0.5| at or above this counts as biased
    double effort_cut = 0.5;  // |mean v| at or above this counts as effortful
};

struct DecoupleReport {
    double bias_index = 0.0;    // |posterior mean beta - 0.5|
    double beta_mean = 0.5;
    double effort_index = 0.0;  // |posterior mean v|
    DecoupleVerdict verdict = DecoupleVerdict::Mixed;
};

namespace detail {

inline DecoupleReport decouple_from_means(double beta_mean, double v_mean,
                                          const DecoupleThresholds& th) {
    DecoupleReport r;
    r.beta_mean = beta_mean;
    r.bias_index = std::fabs(beta_mean - 0.5);
    r.effort_index = std::fabs(v_mean);
    const bool biased = r.bias_index >= th.bias_cut;
    const bool effortful = r.effort_index >= th.effort_cut;
    if (biased && !effortful)
        r.verdict = DecoupleVerdict::BiasDominated;
    else if (effortful && !biased)
        r.verdict = DecoupleVerdict::EffortDominated;
    else
        r.verdict = DecoupleVerdict::Mixed;
    return r;
}

} // namespace detail

inline DecoupleReport decouple_report(const SubjectPosterior& post,
                                      const DecoupleThresholds& th = {}) {
    return detail::decouple_from_means(post.beta.mean, post.v.mean, th);
}

inline DecoupleReport decouple_report(const GroupPosterior& post,
                                      const DecoupleThresholds& th = {}) {
    return detail::decouple_from_means(post.beta_location.mean, post.v_location.mean, th);
}

} // namespace frictionlab
