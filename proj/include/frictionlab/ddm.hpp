#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "frictionlab/errors.hpp"
#include "frictionlab/rng.hpp"
#include "frictionlab/version.hpp"

namespace frictionlab {

// Below this drift magnitude the closed forms switch to their zero-drift
// branches to avoid catastrophic cancellation.
inline constexpr double kDriftEpsilon = 1e-8;

enum class Choice : int { Reject = 0, Accept = 1 };

inline const char* choice_name(Choice c) {
    return c == Choice::Accept ? "accept" : "reject";
}

inline Choice parse_choice(const std::string& s) {
    if (s == "accept" || s == "1") return Choice::Accept;
    if (s == "reject" || s == "0") return Choice::Reject;
    throw SchemaError("unrecognized choice value: " + s);
}

// Two-boundary diffusion parameters. Upper boundary (a) = accept the AI
// recommendation, lower boundary (0) = reject/override it.
struct DdmParams {
    double v = 0.0;       // drift rate, evidence/s; positive drifts toward accept
    double a = 2.0;       // boundary separation, > 0
    double z = 1.0;       // starting point, strictly inside (0, a)
    double sigma = 1.0;   // diffusion coefficient, evidence/sqrt(s), > 0
    double t0 = 0.3;      // non-decision time, s, >= 0

    double beta() const { return z / a; }

    void validate() const {
        if (!std::isfinite(v) || !std::isfinite(a) || !std::isfinite(z) ||
            !std::isfinite(sigma) || !std::isfinite(t0))
            throw ParameterError("ddm parameters must be finite");
        if (a <= 0.0) throw ParameterError("boundary separation a must be > 0");
        if (z <= 0.0 || z >= a) throw ParameterError("starting point z must lie strictly inside (0, a)");
        if (sigma <= 0.0) throw ParameterError("diffusion coefficient sigma must be > 0");
        if (t0 < 0.0) throw ParameterError("non-decision time t0 must be >= 0");
    }

    static DdmParams from_beta(double v, double a, double beta, double sigma = 1.0,
                               double t0 = 0.3) {
        return DdmParams{v, a, beta * a, sigma, t0};
    }

    bool operator==(const DdmParams&) const = default;
};

struct TrialRecord {
    Choice choice = Choice::Reject;
    double rt = 0.0;              // seconds, decision time + t0
    bool ai_correct = false;
    std::string condition_id;
    std::uint64_t seed_path = 0;  // RNG substream index that produced this trial

    bool operator==(const TrialRecord&) const = default;
};

struct TrialSet {
    std::vector<TrialRecord> trials;
    DdmParams params;
    std::string condition_id;
    std::uint64_t seed = 0;
    int schema_version = kTrialSchemaVersion;

    bool operator==(const TrialSet&) const = default;
};

struct SimOptions {
    double max_sim_time = 60.0;  // runaway guard, seconds of simulated time
    // Within-step Brownian-bridge crossing test. Endpoint-only absorption
    // checks leave an O(sqrt(dt)) exit bias that is visible against the
    // closed forms at dt = 1 ms; the bridge test removes it.
    bool bridge_correction = true;
};

inline constexpr double kDefaultDt = 1e-3;

namespace detail {

inline void validate_dt(double dt) {
    if (!(dt > 0.0) || dt > 0.01)
        throw ParameterError("dt must satisfy 0 < dt <= 0.01 s");
}

} // namespace detail

// Euler-Maruyama walk from z, absorbing at 0 (reject) and a (accept).
// Crossings inside a step are detected with the Brownian-bridge probability
// exp(-2*d0*d1/(sigma^2*dt)) and timed at the step midpoint.
template <class R>
TrialRecord simulate_trial(const DdmParams& params, double dt, R& rng,
                           const SimOptions& opts = {}) {
    params.validate();
    detail::validate_dt(dt);

    const double mean_step = params.v * dt;
    const double noise_step = params.sigma * std::sqrt(dt);
    const double var_step = params.sigma * params.sigma * dt;
    // Bridge probabilities are below 4e-16 once both endpoints sit more
    // than 6 noise-sd from a boundary; skip the exp calls there.
    const double near_band = 6.0 * noise_step;

    double x = params.z;
    double t = 0.0;
    while (t < opts.max_sim_time) {
        const double x1 = x + mean_step + noise_step * rng.normal();
        const double t_cross = t + 0.5 * dt;
        if (x1 >= params.a)
            return TrialRecord{Choice::Accept, t_cross + params.t0, false, {}, 0};
        if (x1 <= 0.0)
            return TrialRecord{Choice::Reject, t_cross + params.t0, false, {}, 0};
        if (opts.bridge_correction) {
            const double d_up0 = params.a - x, d_up1 = params.a - x1;
            const double d_dn0 = x, d_dn1 = x1;
            double p_up = 0.0, p_dn = 0.0;
            if (d_up0 < near_band || d_up1 < near_band)
                p_up = std::exp(-2.0 * d_up0 * d_up1 / var_step);
            if (d_dn0 < near_band || d_dn1 < near_band)
                p_dn = std::exp(-2.0 * d_dn0 * d_dn1 / var_step);
            if (p_up > 0.0 || p_dn > 0.0) {
                const double u = rng.uniform();
                if (u < p_up)
                    return TrialRecord{Choice::Accept, t_cross + params.t0, false, {}, 0};
                if (u < p_up + p_dn)
                    return TrialRecord{Choice::Reject, t_cross + params.t0, false, {}, 0};
            }
        }
        x = x1;
        t += dt;
    }
    throw RunawayTrialError("trial did not absorb within the max-time guard; "
                            "parameters are degenerate (e.g. sigma ~ 0 with v ~ 0)");
}

// P(absorb at the accept boundary). Exact: for w = 2v/sigma^2,
//   P = (1 - exp(-w z)) / (1 - exp(-w a)),  P = z/a as v -> 0.
// Evaluated through expm1 with only non-positive exponents so it stays
// stable for any |v| and never overflows.
inline double accept_probability(const DdmParams& params) {
    params.validate();
    const double w = 2.0 * params.v / (params.sigma * params.sigma);
    if (std::fabs(params.v) < kDriftEpsilon) return params.z / params.a;
    if (w > 0.0) return std::expm1(-w * params.z) / std::expm1(-w * params.a);
    const double u = -w;
    return std::exp(u * (params.z - params.a)) * std::expm1(-u * params.z) /
           std::expm1(-u * params.a);
}

struct DecisionTimeEstimate {
    double seconds = 0.0;     // expected absorption time, t0 excluded
    double std_error = 0.0;   // 0 for the exact zero-drift branch
    std::size_t trials = 0;   // Monte Carlo sample size (0 when exact)
    bool exact = false;
};

struct DecisionTimeOptions {
    std::size_t trials = 200000;
    double dt = kDefaultDt;
    std::uint64_t seed = 0x6d65616e74696dULL;
};

// Zero drift has the closed form E[T] = z(a-z)/sigma^2; any other drift is
// estimated by Monte Carlo with the reported standard error.
inline DecisionTimeEstimate mean_decision_time(const DdmParams& params,
                                               const DecisionTimeOptions& opts = {}) {
    params.validate();
    if (std::fabs(params.v) < kDriftEpsilon) {
        return DecisionTimeEstimate{params.z * (params.a - params.z) /
                                        (params.sigma * params.sigma),
                                    0.0, 0, true};
    }
    if (opts.trials < 2) throw ParameterError("mean_decision_time needs >= 2 trials");
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < opts.trials; ++i) {
        Rng rng = Rng::substream(opts.seed, rng_lane::kTrial, i);
        const double dtime = simulate_trial(params, opts.dt, rng).rt - params.t0;
        sum += dtime;
        sum_sq += dtime * dtime;
    }
    const double n = static_cast<double>(opts.trials);
    const double mean = sum / n;
    const double var = (sum_sq - n * mean * mean) / (n - 1.0);
    return DecisionTimeEstimate{mean, std::sqrt(var / n), opts.trials, false};
}

// n independent trials on per-trial substreams; byte-identical for a given
// (seed, n, params) regardless of scheduling.
inline TrialSet simulate_dataset(const DdmParams& params, std::size_t n,
                                 const std::string& condition_id, double ai_correct_rate,
                                 std::uint64_t seed, double dt = kDefaultDt,
                                 const SimOptions& opts = {}) {
    params.validate();
    if (n < 1) throw ParameterError("simulate_dataset requires n >= 1");
    if (ai_correct_rate < 0.0 || ai_correct_rate > 1.0)
        throw ParameterError("ai_correct_rate must lie in [0, 1]");

    TrialSet set;
    set.params = params;
    set.condition_id = condition_id;
    set.seed = seed;
    set.trials.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, rng_lane::kTrial, i);
        TrialRecord rec = simulate_trial(params, dt, rng, opts);
        Rng label_rng = Rng::substream(seed, rng_lane::kAiLabel, i);
        rec.ai_correct = label_rng.bernoulli(ai_correct_rate);
        rec.condition_id = condition_id;
        rec.seed_path = i;
        set.trials.push_back(std::move(rec));
    }
    return set;
}

} // namespace frictionlab
