#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "frictionlab/ddm.hpp"
#include "frictionlab/errors.hpp"

namespace frictionlab {

// Position in the dependency x friction plane.
struct EvalPoint {
    double dependency = 0.0;  // delegation of decision-making power, [0, 1]
    double friction = 0.0;    // applied friction phi, [0, 1]

    void validate() const {
        if (dependency < 0.0 || dependency > 1.0 || friction < 0.0 || friction > 1.0)
            throw ParameterError("eval point coordinates must lie in [0, 1]");
    }
};

enum class Quadrant : int {
    CognitiveAgencySurrender = 0,
    SynergisticSynthesis = 1,
    LowDependencyLowFriction = 2,
    LowDependencyHighFriction = 3,
};

inline const char* quadrant_name(Quadrant q) {
    switch (q) {
        case Quadrant::CognitiveAgencySurrender: return "cognitive-agency-surrender";
        case Quadrant::SynergisticSynthesis: return "synergistic-synthesis";
        case Quadrant::LowDependencyLowFriction: return "low-dependency-low-friction";
        default: return "low-dependency-high-friction";
    }
}

// Boundary values classify to the lower region.
inline Quadrant classify_quadrant(const EvalPoint& p, double d_cut = 0.5,
                                  double phi_cut = 0.5) {
    p.validate();
    const bool high_dep = p.dependency > d_cut;
    const bool high_fric = p.friction > phi_cut;
    if (high_dep)
        return high_fric ? Quadrant::SynergisticSynthesis
                         : Quadrant::CognitiveAgencySurrender;
    return high_fric ? Quadrant::LowDependencyHighFriction
                     : Quadrant::LowDependencyLowFriction;
}

// Per-trial view the metrics need; the harness flattens its rows into this.
struct TrialObservation {
    Choice choice = Choice::Reject;
    double rt = 0.0;
    bool ai_correct = false;
    double gte = 0.0;
};

struct AgencyWeights {
    double w_bias = 0.5;    // automation-bias term
    double w_speed = 0.25;  // fast-accept term
    double w_gaze = 0.25;   // inverted gaze-entropy term
    // Accepts faster than this cutoff count as heuristic one-click accepts.
    // The harness derives it from an RT percentile of its baseline cell.
    double fast_rt_cutoff = 0.5;  // seconds
    int aoi_count = 4;            // for the log2(K) GTE normalization

    void validate() const {
        if (w_bias < 0.0 || w_speed < 0.0 || w_gaze < 0.0)
            throw ParameterError("agency metric weights must be >= 0");
        if (std::fabs(w_bias + w_speed + w_gaze - 1.0) > 1e-9)
            throw ParameterError("agency metric weights must sum to 1");
        if (aoi_count < 2) throw ParameterError("aoi_count must be >= 2");
        if (!(fast_rt_cutoff > 0.0)) throw ParameterError("fast_rt_cutoff must be > 0");
    }
};

struct AgencyMetrics {
    double automation_bias_rate = 0.0;  // P(accept | ai wrong)
    double accuracy = 0.0;              // P(final decision correct)
    double mean_rt = 0.0;
    double mean_gte = 0.0;
    double surrender_index = 0.0;  // [0, 1]
    double fast_accept_share = 0.0;

    bool operator==(const AgencyMetrics&) const = default;
};

// surrender_index = w1 * P(accept | ai wrong)
//                 + w2 * (share of all trials that are fast accepts)
//                 + w3 * (1 - mean_gte / log2 K)
inline AgencyMetrics compute_agency_metrics(const std::vector<TrialObservation>& trials,
                                            const AgencyWeights& weights = {}) {
    weights.validate();
    if (trials.empty())
        throw InsufficientDataError("compute_agency_metrics: empty trial set");

    std::size_t wrong = 0, wrong_accepted = 0, correct_decisions = 0, fast_accepts = 0;
    double rt_sum = 0.0, gte_sum = 0.0;
    for (const TrialObservation& tr : trials) {
        const bool accepted = tr.choice == Choice::Accept;
        if (!tr.ai_correct) {
            ++wrong;
            if (accepted) ++wrong_accepted;
        }
        const bool decision_correct = accepted == tr.ai_correct;
        if (decision_correct) ++correct_decisions;
        if (accepted && tr.rt < weights.fast_rt_cutoff) ++fast_accepts;
        rt_sum += tr.rt;
        gte_sum += tr.gte;
    }
    const double n = static_cast<double>(trials.size());
    AgencyMetrics m;
    m.automation_bias_rate =
        wrong > 0 ? static_cast<double>(wrong_accepted) / static_cast<double>(wrong) : 0.0;
    m.accuracy = static_cast<double>(correct_decisions) / n;
    m.mean_rt = rt_sum / n;
    m.mean_gte = gte_sum / n;
    m.fast_accept_share = static_cast<double>(fast_accepts) / n;
    const double gte_term =
        std::clamp(1.0 - m.mean_gte / std::log2(static_cast<double>(weights.aoi_count)),
                   0.0, 1.0);
    m.surrender_index = weights.w_bias * m.automation_bias_rate +
                        weights.w_speed * m.fast_accept_share + weights.w_gaze * gte_term;
    return m;
}

// RT percentile helper for deriving the fast-accept cutoff from a baseline
// condition (linear interpolation between order statistics).
inline double rt_percentile(std::vector<double> rts, double percentile) {
    if (rts.empty()) throw InsufficientDataError("rt_percentile: no data");
    if (percentile < 0.0 || percentile > 100.0)
        throw ParameterError("percentile must lie in [0, 100]");
    std::sort(rts.begin(), rts.end());
    const double pos = percentile / 100.0 * (static_cast<double>(rts.size()) - 1.0);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= rts.size()) return rts.back();
    const double frac = pos - static_cast<double>(i);
    return rts[i] * (1.0 - frac) + rts[i + 1] * frac;
}

} // namespace frictionlab
