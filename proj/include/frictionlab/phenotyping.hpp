#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "frictionlab/errors.hpp"
#include "frictionlab/rng.hpp"

namespace frictionlab {

enum class EngagementState : int { AnalyticalEffort = 0, Confusion = 1, HeuristicAcceptance = 2 };
inline constexpr int kEngagementStates = 3;

inline const char* engagement_name(EngagementState s) {
    switch (s) {
        case EngagementState::AnalyticalEffort: return "analytical-effort";
        case EngagementState::Confusion: return "confusion";
        default: return "heuristic-acceptance";
    }
}

// AOI 0 is the answer/recommendation panel; AOIs 1..K-1 are evidence panels.
struct Scanpath {
    std::vector<int> aoi_ids;
    std::vector<double> fixation_durations;  // seconds
    int aoi_count = 0;

    void validate() const {
        if (aoi_count < 2) throw ParameterError("scanpath needs aoi_count >= 2");
        if (aoi_ids.size() != fixation_durations.size())
            throw ParameterError("scanpath id/duration lengths differ");
        for (int id : aoi_ids)
            if (id < 0 || id >= aoi_count) throw ParameterError("aoi id out of range");
        for (double d : fixation_durations)
            if (!(d > 0.0)) throw ParameterError("fixation durations must be > 0");
    }
};

struct TelemetryFrame {
    double gte = 0.0;                // bits
    double pupil_dilation = 0.0;     // z-scored proxy
    double pfc_activation = 0.0;     // z-scored proxy
    double hesitation_latency = 0.0; // seconds of pre-decision pause
    int verification_depth = 0;      // evidence-AOI fixations
};

// Row-major row-stochastic matrix over AOIs.
struct TransitionMatrix {
    int k = 0;
    std::vector<double> p;  // k*k

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * k + j]; }
    double& at(int i, int j) { return p[static_cast<std::size_t>(i) * k + j]; }

    void validate_stochastic(double tol = 1e-9) const {
        if (k < 2 || p.size() != static_cast<std::size_t>(k) * k)
            throw ParameterError("malformed transition matrix");
        for (int i = 0; i < k; ++i) {
            double row = 0.0;
            for (int j = 0; j < k; ++j) {
                if (at(i, j) < 0.0) throw ParameterError("negative transition probability");
                row += at(i, j);
            }
            if (std::fabs(row - 1.0) > tol)
                throw ParameterError("transition matrix row does not sum to 1");
        }
    }
};

// Smoothed first-order transition estimate. Rows with no observations (and
// zero smoothing) fall back to uniform.
inline TransitionMatrix transition_matrix(const Scanpath& path, double smoothing = 0.5) {
    path.validate();
    if (smoothing < 0.0) throw ParameterError("smoothing pseudo-count must be >= 0");
    if (path.aoi_ids.size() < 2)
        throw InsufficientDataError("transition_matrix needs a path of length >= 2");

    const int k = path.aoi_count;
    std::vector<double> counts(static_cast<std::size_t>(k) * k, 0.0);
    for (std::size_t i = 0; i + 1 < path.aoi_ids.size(); ++i)
        counts[static_cast<std::size_t>(path.aoi_ids[i]) * k + path.aoi_ids[i + 1]] += 1.0;

    TransitionMatrix m;
    m.k = k;
    m.p.assign(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        double row = 0.0;
        for (int j = 0; j < k; ++j) row += counts[static_cast<std::size_t>(i) * k + j];
        const double denom = row + smoothing * k;
        for (int j = 0; j < k; ++j) {
            m.at(i, j) = denom > 0.0
                             ? (counts[static_cast<std::size_t>(i) * k + j] + smoothing) / denom
                             : 1.0 / k;
        }
    }
    return m;
}

// Stationary distribution by power iteration. Iterating the half-lazy chain
// (P + I)/2 keeps the same stationary vector while converging for periodic
// matrices such as deterministic cycles.
inline std::vector<double> stationary_distribution(const TransitionMatrix& m,
                                                   double residual = 1e-12,
                                                   int max_iters = 200000) {
    m.validate_stochastic();
    const int k = m.k;
    std::vector<double> pi(k, 1.0 / k), next(k, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
        for (int j = 0; j < k; ++j) next[j] = 0.5 * pi[j];
        for (int i = 0; i < k; ++i) {
            const double w = 0.5 * pi[i];
            for (int j = 0; j < k; ++j) next[j] += w * m.at(i, j);
        }
        double gap = 0.0, norm = 0.0;
        for (int j = 0; j < k; ++j) {
            gap += std::fabs(next[j] - pi[j]);
            norm += next[j];
        }
        for (int j = 0; j < k; ++j) pi[j] = next[j] / norm;
        if (gap <= residual) return pi;
    }
    throw NumericError("stationary distribution power iteration did not converge");
}

// Stationary-weighted conditional entropy of the transition matrix, in bits.
inline double gaze_transition_entropy(const TransitionMatrix& m) {
    const std::vector<double> pi = stationary_distribution(m);
    double h = 0.0;
    for (int i = 0; i < m.k; ++i) {
        double row_h = 0.0;
        for (int j = 0; j < m.k; ++j) {
            const double p = m.at(i, j);
            if (p > 0.0) row_h -= p * std::log2(p);
        }
        h += pi[i] * row_h;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Generative engagement model. Every invented default lives here so
// experiments can stress them from one place.
// ---------------------------------------------------------------------------

struct EngagementModel {
    // heuristic acceptance: camped on the answer AOI
    double heuristic_self = 0.9;    // answer self-transition
    double heuristic_return = 0.9;  // evidence -> answer

    // analytical effort: structured sweep over evidence AOIs
    double analytical_next = 0.35;
    double analytical_prev = 0.35;
    double analytical_answer = 0.2;
    double analytical_self = 0.1;

    // dwell means (seconds), lognormal with the shared sigma below
    double dwell_heuristic_answer = 1.2;
    double dwell_heuristic_evidence = 0.3;
    double dwell_analytical = 0.8;
    double dwell_confusion = 0.25;
    double dwell_log_sigma = 0.35;

    // autonomic proxies (z-scored)
    double pupil_mean_analytical = 1.2, pfc_mean_analytical = 1.2;
    double pupil_mean_confusion = 0.1, pfc_mean_confusion = 0.0;
    double pupil_mean_heuristic = -0.6, pfc_mean_heuristic = -0.6;
    double autonomic_sd = 0.35;

    // pre-decision hesitation (seconds)
    double hesitation_mean_analytical = 1.8, hesitation_sd_analytical = 0.4;
    double hesitation_mean_confusion = 2.4, hesitation_sd_confusion = 0.7;
    double hesitation_mean_heuristic = 0.35, hesitation_sd_heuristic = 0.1;
};

// The per-state generator matrix the scanpath sampler walks.
inline TransitionMatrix engagement_generator(EngagementState state, int k,
                                             const EngagementModel& model = {}) {
    if (k < 3) throw ParameterError("engagement generator needs K >= 3");
    TransitionMatrix m;
    m.k = k;
    m.p.assign(static_cast<std::size_t>(k) * k, 0.0);
    const int evid = k - 1;
    switch (state) {
        case EngagementState::HeuristicAcceptance: {
            const double spread = (1.0 - model.heuristic_self) / evid;
            for (int j = 1; j < k; ++j) m.at(0, j) = spread;
            m.at(0, 0) = model.heuristic_self;
            for (int i = 1; i < k; ++i) {
                const double rest = (1.0 - model.heuristic_return) / (k - 1);
                for (int j = 0; j < k; ++j) m.at(i, j) = rest;
                m.at(i, 0) = model.heuristic_return;
            }
            break;
        }
        case EngagementState::AnalyticalEffort: {
            m.at(0, 0) = model.analytical_self;
            for (int j = 1; j < k; ++j) m.at(0, j) = (1.0 - model.analytical_self) / evid;
            for (int i = 1; i < k; ++i) {
                const int next = (i % evid) + 1;       // cyclic over evidence AOIs
                const int prev = ((i - 2 + evid) % evid) + 1;
                m.at(i, 0) += model.analytical_answer;
                m.at(i, i) += model.analytical_self;
                m.at(i, next) += model.analytical_next;
                m.at(i, prev) += model.analytical_prev;
                // evidence pools of size 2 alias next == prev; renormalize
                double row = 0.0;
                for (int j = 0; j < k; ++j) row += m.at(i, j);
                for (int j = 0; j < k; ++j) m.at(i, j) /= row;
            }
            break;
        }
        case EngagementState::Confusion: {
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) m.at(i, j) = 1.0 / k;
            break;
        }
    }
    return m;
}

template <class R>
Scanpath generate_scanpath(EngagementState state, int k, std::size_t length, R& rng,
                           const EngagementModel& model = {}) {
    if (k < 3) throw ParameterError("generate_scanpath needs K >= 3 (answer + 2 evidence)");
    if (length < 20) throw ParameterError("generate_scanpath needs length >= 20");
    const TransitionMatrix gen = engagement_generator(state, k, model);

    auto dwell_mean = [&](int aoi) {
        switch (state) {
            case EngagementState::HeuristicAcceptance:
                return aoi == 0 ? model.dwell_heuristic_answer : model.dwell_heuristic_evidence;
            case EngagementState::AnalyticalEffort:
                return model.dwell_analytical;
            default:
                return model.dwell_confusion;
        }
    };

    Scanpath path;
    path.aoi_count = k;
    path.aoi_ids.reserve(length);
    path.fixation_durations.reserve(length);
    int cur = (state == EngagementState::HeuristicAcceptance) ? 0 : 1;
    for (std::size_t step = 0; step < length; ++step) {
        path.aoi_ids.push_back(cur);
        const double mu = std::log(dwell_mean(cur)) - 0.5 * model.dwell_log_sigma * model.dwell_log_sigma;
        path.fixation_durations.push_back(std::exp(mu + model.dwell_log_sigma * rng.normal()));
        const double u = rng.uniform();
        double acc = 0.0;
        int nxt = k - 1;
        for (int j = 0; j < k; ++j) {
            acc += gen.at(cur, j);
            if (u < acc) {
                nxt = j;
                break;
            }
        }
        cur = nxt;
    }
    return path;
}

struct AutonomicSample {
    double pupil_dilation = 0.0;
    double pfc_activation = 0.0;
};

template <class R>
AutonomicSample generate_autonomic(EngagementState state, R& rng,
                                   const EngagementModel& model = {}) {
    double pupil_mean, pfc_mean;
    switch (state) {
        case EngagementState::AnalyticalEffort:
            pupil_mean = model.pupil_mean_analytical;
            pfc_mean = model.pfc_mean_analytical;
            break;
        case EngagementState::Confusion:
            pupil_mean = model.pupil_mean_confusion;
            pfc_mean = model.pfc_mean_confusion;
            break;
        default:
            pupil_mean = model.pupil_mean_heuristic;
            pfc_mean = model.pfc_mean_heuristic;
            break;
    }
    return AutonomicSample{rng.normal(pupil_mean, model.autonomic_sd),
                           rng.normal(pfc_mean, model.autonomic_sd)};
}

template <class R>
double generate_hesitation(EngagementState state, R& rng, const EngagementModel& model = {}) {
    double mean, sd;
    switch (state) {
        case EngagementState::AnalyticalEffort:
            mean = model.hesitation_mean_analytical;
            sd = model.hesitation_sd_analytical;
            break;
        case EngagementState::Confusion:
            mean = model.hesitation_mean_confusion;
            sd = model.hesitation_sd_confusion;
            break;
        default:
            mean = model.hesitation_mean_heuristic;
            sd = model.hesitation_sd_heuristic;
            break;
    }
    return std::max(0.01, rng.normal(mean, sd));
}

// One synthetic telemetry frame: GTE computed from a generated scanpath,
// autonomic and hesitation channels drawn from the state's model.
template <class R>
TelemetryFrame synthesize_frame(EngagementState state, int k, std::size_t path_length,
                                R& rng, const EngagementModel& model = {}) {
    const Scanpath path = generate_scanpath(state, k, path_length, rng, model);
    const AutonomicSample aut = generate_autonomic(state, rng, model);
    TelemetryFrame frame;
    frame.gte = gaze_transition_entropy(transition_matrix(path, 0.5));
    frame.pupil_dilation = aut.pupil_dilation;
    frame.pfc_activation = aut.pfc_activation;
    frame.hesitation_latency = generate_hesitation(state, rng, model);
    frame.verification_depth = 0;
    for (int id : path.aoi_ids)
        if (id >= 1) ++frame.verification_depth;
    return frame;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes over (gte, pupil, pfc, hesitation).
// ---------------------------------------------------------------------------

inline constexpr int kFrameFeatures = 4;

inline std::array<double, kFrameFeatures> frame_features(const TelemetryFrame& f) {
    return {f.gte, f.pupil_dilation, f.pfc_activation, f.hesitation_latency};
}

struct EngagementClassifier {
    struct ClassModel {
        std::array<double, kFrameFeatures> mean{};
        std::array<double, kFrameFeatures> var{};
        double log_prior = 0.0;
    };
    std::array<ClassModel, kEngagementStates> classes{};
    // Feature mask; the GTE-only ablation turns the other channels off.
    std::array<bool, kFrameFeatures> active{true, true, true, true};
    bool trained = false;
};

inline EngagementClassifier train_engagement_classifier(
    const std::vector<TelemetryFrame>& frames, const std::vector<EngagementState>& labels,
    std::array<bool, kFrameFeatures> active = {true, true, true, true}) {
    if (frames.size() != labels.size() || frames.empty())
        throw InsufficientDataError("classifier training needs labeled frames");
    EngagementClassifier clf;
    clf.active = active;
    std::array<std::size_t, kEngagementStates> counts{};
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const int c = static_cast<int>(labels[i]);
        const auto x = frame_features(frames[i]);
        for (int f = 0; f < kFrameFeatures; ++f) clf.classes[c].mean[f] += x[f];
        ++counts[c];
    }
    for (int c = 0; c < kEngagementStates; ++c) {
        if (counts[c] < 2)
            throw InsufficientDataError("classifier training needs >= 2 frames per state");
        for (int f = 0; f < kFrameFeatures; ++f)
            clf.classes[c].mean[f] /= static_cast<double>(counts[c]);
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const int c = static_cast<int>(labels[i]);
        const auto x = frame_features(frames[i]);
        for (int f = 0; f < kFrameFeatures; ++f) {
            const double d = x[f] - clf.classes[c].mean[f];
            clf.classes[c].var[f] += d * d;
        }
    }
    for (int c = 0; c < kEngagementStates; ++c) {
        for (int f = 0; f < kFrameFeatures; ++f) {
            clf.classes[c].var[f] =
                std::max(1e-6, clf.classes[c].var[f] / static_cast<double>(counts[c] - 1));
        }
        clf.classes[c].log_prior = std::log(static_cast<double>(counts[c]) /
                                            static_cast<double>(frames.size()));
    }
    clf.trained = true;
    return clf;
}

// Normalized posterior over engagement states; argmax is the hard label.
inline std::array<double, kEngagementStates> classify_engagement(
    const TelemetryFrame& frame, const EngagementClassifier& clf) {
    if (!clf.trained)
        throw ConfigError("classify_engagement: classifier has no class-conditional model");
    if (frame.gte < 0.0 || frame.hesitation_latency < 0.0 || frame.verification_depth < 0)
        throw ParameterError("telemetry frame violates its invariants");
    const auto x = frame_features(frame);
    std::array<double, kEngagementStates> logp{};
    for (int c = 0; c < kEngagementStates; ++c) {
        double lp = clf.classes[c].log_prior;
        for (int f = 0; f < kFrameFeatures; ++f) {
            if (!clf.active[f]) continue;
            const double var = clf.classes[c].var[f];
            const double d = x[f] - clf.classes[c].mean[f];
            lp += -0.5 * d * d / var - 0.5 * std::log(2.0 * 3.141592653589793 * var);
        }
        logp[c] = lp;
    }
    const double mx = std::max({logp[0], logp[1], logp[2]});
    std::array<double, kEngagementStates> prob{};
    double sum = 0.0;
    for (int c = 0; c < kEngagementStates; ++c) {
        prob[c] = std::exp(logp[c] - mx);
        sum += prob[c];
    }
    for (double& p : prob) p /= sum;
    return prob;
}

inline EngagementState hard_label(const std::array<double, kEngagementStates>& prob) {
    int best = 0;
    for (int c = 1; c < kEngagementStates; ++c)
        if (prob[c] > prob[best]) best = c;
    return static_cast<EngagementState>(best);
}

} // namespace frictionlab
