#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frictionlab/ddm.hpp"
#include "frictionlab/errors.hpp"
#include "frictionlab/phenotyping.hpp"
#include "frictionlab/rng.hpp"

namespace frictionlab {

enum class AdviceCondition : int { FrictionlessConsensus = 0, ScaffoldedFriction = 1 };

inline const char* condition_name(AdviceCondition c) {
    return c == AdviceCondition::FrictionlessConsensus ? "consensus" : "friction";
}

inline AdviceCondition parse_condition(const std::string& s) {
    if (s == "consensus" || s == "frictionless-consensus") return AdviceCondition::FrictionlessConsensus;
    if (s == "friction" || s == "scaffolded-friction") return AdviceCondition::ScaffoldedFriction;
    throw ConfigError("unrecognized advice condition: " + s);
}

struct AgentSpec {
    double stance_mean = 0.5;          // propensity to support the focal claim, [0,1]
    double stance_concentration = 40.0;
    std::string heterogeneity_tag;     // model-family identifier

    void validate() const {
        if (stance_mean < 0.0 || stance_mean > 1.0)
            throw ParameterError("stance_mean must lie in [0, 1]");
        if (!(stance_concentration > 0.0))
            throw ParameterError("stance_concentration must be > 0");
    }
};

// Agents x claims stance grid with its divergence (mean pairwise absolute
// stance gap, averaged over claims) and the number of exposed contrasting
// claim pairs.
struct DisagreementMatrix {
    int agents = 0;
    int claims = 0;
    std::vector<double> stances;  // row-major agents x claims
    double divergence = 0.0;
    int granularity = 0;
    std::vector<std::pair<int, int>> exposed_pairs;

    double stance(int agent, int claim) const {
        return stances[static_cast<std::size_t>(agent) * claims + claim];
    }

    static int max_granularity(int claims) {
        // A single claim still exposes itself as one contrast.
        return std::max(1, claims * (claims - 1) / 2);
    }
};

inline double compute_divergence(const std::vector<double>& stances, int agents, int claims) {
    if (agents < 2 || claims < 1) throw ParameterError("divergence needs >= 2 agents, >= 1 claim");
    double total = 0.0;
    const int pairs = agents * (agents - 1) / 2;
    for (int c = 0; c < claims; ++c) {
        double claim_sum = 0.0;
        for (int i = 0; i < agents; ++i)
            for (int j = i + 1; j < agents; ++j)
                claim_sum += std::fabs(stances[static_cast<std::size_t>(i) * claims + c] -
                                       stances[static_cast<std::size_t>(j) * claims + c]);
        total += claim_sum / pairs;
    }
    return total / claims;
}

inline DisagreementMatrix disagreement_from_stances(std::vector<double> stances, int agents,
                                                    int claims, int granularity) {
    DisagreementMatrix m;
    m.agents = agents;
    m.claims = claims;
    m.stances = std::move(stances);
    m.divergence = compute_divergence(m.stances, agents, claims);
    const int g_max = DisagreementMatrix::max_granularity(claims);
    m.granularity = std::clamp(granularity <= 0 ? g_max : granularity, 1, g_max);

    // Expose the g claim pairs with the largest inter-claim contrast.
    std::vector<std::pair<double, std::pair<int, int>>> ranked;
    for (int c1 = 0; c1 < claims; ++c1) {
        for (int c2 = c1 + 1; c2 < claims; ++c2) {
            double contrast = 0.0;
            for (int agent = 0; agent < agents; ++agent)
                contrast += std::fabs(m.stance(agent, c1) - m.stance(agent, c2));
            ranked.push_back({contrast / agents, {c1, c2}});
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < m.granularity && i < static_cast<int>(ranked.size()); ++i)
        m.exposed_pairs.push_back(ranked[i].second);
    if (m.exposed_pairs.empty()) m.exposed_pairs.push_back({0, 0});
    return m;
}

struct AdviceBundle {
    AdviceCondition condition = AdviceCondition::FrictionlessConsensus;
    Choice recommendation = Choice::Accept;
    std::optional<DisagreementMatrix> disagreement;
    double fluency = 0.95;  // [0, 1]
};

struct DebateConfig {
    int granularity = 0;              // 0 -> expose all claim pairs
    double consensus_fluency = 0.95;
    double friction_fluency = 0.4;
};

// Each agent samples a stance per claim from Beta(mean*c, (1-mean)*c).
// Consensus aggregates the focal claim (claim 0) to a majority
// recommendation and discards the divergence. Scaffolded friction mirrors
// the last agent's focal stance (s -> 1-s), guaranteeing consistent
// minority dissent, and emits the full disagreement matrix.
template <class R>
AdviceBundle run_debate(const std::vector<AgentSpec>& pool, int claims,
                        AdviceCondition condition, R& rng, const DebateConfig& cfg = {}) {
    if (claims < 1) throw ParameterError("run_debate needs claims >= 1");
    if (pool.empty()) throw ParameterError("run_debate needs a non-empty agent pool");
    for (const AgentSpec& a : pool) a.validate();
    if (condition == AdviceCondition::ScaffoldedFriction) {
        if (pool.size() < 2)
            throw ParameterError("scaffolded friction needs >= 2 agents");
        bool homologous = true;
        for (const AgentSpec& a : pool)
            if (a.heterogeneity_tag != pool.front().heterogeneity_tag) homologous = false;
        if (homologous)
            throw PseudoDebateError("all agents share one heterogeneity tag; a homologous "
                                    "pool can only stage a pseudo-debate");
    }

    const int agents = static_cast<int>(pool.size());
    std::vector<double> stances(static_cast<std::size_t>(agents) * claims, 0.0);
    for (int i = 0; i < agents; ++i) {
        const double mean = std::clamp(pool[i].stance_mean, 1e-6, 1.0 - 1e-6);
        const double conc = pool[i].stance_concentration;
        for (int c = 0; c < claims; ++c)
            stances[static_cast<std::size_t>(i) * claims + c] =
                rng.beta(mean * conc, (1.0 - mean) * conc);
    }

    AdviceBundle bundle;
    bundle.condition = condition;
    if (condition == AdviceCondition::ScaffoldedFriction) {
        // devil's advocate: mirror the last agent on the focal claim
        auto& focal = stances[static_cast<std::size_t>(agents - 1) * claims];
        focal = 1.0 - focal;
        bundle.disagreement = disagreement_from_stances(std::move(stances), agents, claims,
                                                        cfg.granularity);
        bundle.fluency = cfg.friction_fluency;
        double mean_focal = 0.0;
        for (int i = 0; i < agents; ++i) mean_focal += bundle.disagreement->stance(i, 0);
        bundle.recommendation =
            (mean_focal / agents >= 0.5) ? Choice::Accept : Choice::Reject;
    } else {
        double mean_focal = 0.0;
        for (int i = 0; i < agents; ++i)
            mean_focal += stances[static_cast<std::size_t>(i) * claims];
        bundle.recommendation =
            (mean_focal / agents >= 0.5) ? Choice::Accept : Choice::Reject;
        bundle.fluency = cfg.consensus_fluency;
    }
    return bundle;
}

struct UserProfile {
    double wmc = 0.6;        // working-memory capacity, (0, 1], same scale as phi
    double expertise = 0.5;  // [0, 1]
    double beta0 = 0.85;     // baseline bias, (0, 1)
    double v_base = 1.0;     // baseline drift capability, > 0

    void validate() const {
        if (!(wmc > 0.0) || wmc > 1.0) throw ParameterError("wmc must lie in (0, 1]");
        if (expertise < 0.0 || expertise > 1.0)
            throw ParameterError("expertise must lie in [0, 1]");
        if (!(beta0 > 0.0) || !(beta0 < 1.0))
            throw ParameterError("beta0 must lie strictly inside (0, 1)");
        if (!(v_base > 0.0)) throw ParameterError("v_base must be > 0");
    }
};

struct FrictionProfile {
    double phi = 0.0;  // [0, 1]

    void validate() const {
        if (phi < 0.0 || phi > 1.0) throw ParameterError("phi must lie in [0, 1]");
    }
};

// phi = min(1, divergence * g / g_max); zero under consensus by definition.
inline FrictionProfile effective_friction(const AdviceBundle& bundle) {
    if (bundle.condition == AdviceCondition::FrictionlessConsensus)
        return FrictionProfile{0.0};
    if (!bundle.disagreement || !(bundle.disagreement->divergence > 0.0))
        throw ParameterError("scaffolded bundle must carry divergence > 0");
    const DisagreementMatrix& d = *bundle.disagreement;
    const double g_max = DisagreementMatrix::max_granularity(d.claims);
    return FrictionProfile{std::min(1.0, d.divergence * d.granularity / g_max)};
}

struct ModulationConfig {
    double k_novice = 0.5;   // drift cost novices pay per unit friction
    double c_shock = 0.3;    // drift collapse factor past the shock boundary
    double a = 2.0;
    double sigma = 1.0;
    double t0 = 0.3;
};

// Friction-to-DDM mapping. Below the shock boundary (phi <= wmc) the start
// bias flattens linearly toward 0.5 and drift pays an expertise-moderated
// cost; past it, the bias snaps back to baseline and drift collapses.
// The returned v is the drift magnitude toward the *correct* choice; the
// caller orients its sign from the trial's ground truth.
inline DdmParams modulate_params(const UserProfile& user, const FrictionProfile& friction,
                                 const ModulationConfig& cfg = {}) {
    user.validate();
    friction.validate();
    const double phi = friction.phi;
    double beta, v_eff;
    if (phi <= user.wmc) {
        beta = user.beta0 + (0.5 - user.beta0) * (phi / user.wmc);
        v_eff = user.v_base *
                (user.expertise + (1.0 - user.expertise) * (1.0 - phi * cfg.k_novice));
    } else {
        beta = user.beta0;
        v_eff = user.v_base * cfg.c_shock;
    }
    return DdmParams::from_beta(v_eff, cfg.a, beta, cfg.sigma, cfg.t0);
}

// ---------------------------------------------------------------------------
// Dynamic moderation: Beta belief over the per-exposure shock probability,
// conjugately updated from classified telemetry frames.
// ---------------------------------------------------------------------------

struct ModerationConfig {
    double prior_alpha = 0.5;  // prior mean 0.1, matching the raise threshold
    double prior_omega = 4.5;
    double shock_threshold = 0.3;  // posterior mean above this lowers g
    double calm_threshold = 0.1;   // below this for a sustained window raises g
    int calm_window = 5;
    int g_floor = 1;
};

struct ModerationBelief {
    double alpha = 0.5;
    double omega = 4.5;
    int calm_streak = 0;

    static ModerationBelief initial(const ModerationConfig& cfg = {}) {
        return ModerationBelief{cfg.prior_alpha, cfg.prior_omega, 0};
    }

    double shock_probability() const { return alpha / (alpha + omega); }
};

struct ModerationStep {
    int granularity = 1;
    ModerationBelief belief;
    bool changed = false;
};

// One frame of the moderation loop. Evidence resets whenever g moves so the
// belief always describes the *current* granularity level.
inline ModerationStep moderation_step(const TelemetryFrame& frame, int g,
                                      ModerationBelief belief,
                                      const EngagementClassifier& classifier, int g_max,
                                      const ModerationConfig& cfg = {}) {
    if (g_max < cfg.g_floor) throw ParameterError("g_max below the granularity floor");
    const EngagementState label = hard_label(classify_engagement(frame, classifier));
    if (label == EngagementState::Confusion)
        belief.alpha += 1.0;
    else
        belief.omega += 1.0;

    const double p_shock = belief.shock_probability();
    ModerationStep out;
    out.granularity = g;
    if (p_shock > cfg.shock_threshold) {
        belief.calm_streak = 0;
        if (g > cfg.g_floor) {
            out.granularity = g - 1;
            out.changed = true;
        }
    } else if (p_shock < cfg.calm_threshold) {
        belief.calm_streak += 1;
        if (belief.calm_streak >= cfg.calm_window && g < g_max) {
            out.granularity = g + 1;
            out.changed = true;
        }
    } else {
        belief.calm_streak = 0;
    }
    if (out.changed) belief = ModerationBelief::initial(cfg);
    out.belief = belief;
    return out;
}

// Folds a telemetry history through the moderation loop.
inline ModerationStep dynamic_moderation(const std::vector<TelemetryFrame>& history, int g,
                                         ModerationBelief belief,
                                         const EngagementClassifier& classifier, int g_max,
                                         const ModerationConfig& cfg = {}) {
    if (history.empty()) throw InsufficientDataError("dynamic_moderation needs history");
    ModerationStep step{g, belief, false};
    for (const TelemetryFrame& frame : history)
        step = moderation_step(frame, step.granularity, step.belief, classifier, g_max, cfg);
    return step;
}

// ---------------------------------------------------------------------------
// Domain policy gate.
// ---------------------------------------------------------------------------

enum class DomainClass : int { HighStakes = 0, TimeCritical = 1, LowRisk = 2 };

inline const char* domain_name(DomainClass d) {
    switch (d) {
        case DomainClass::HighStakes: return "high-stakes";
        case DomainClass::TimeCritical: return "time-critical";
        default: return "low-risk";
    }
}

inline DomainClass parse_domain(const std::string& s) {
    if (s == "high-stakes" || s == "highstakes") return DomainClass::HighStakes;
    if (s == "time-critical" || s == "timecritical") return DomainClass::TimeCritical;
    if (s == "low-risk" || s == "lowrisk") return DomainClass::LowRisk;
    throw ConfigError("unrecognized domain class: " + s);
}

inline std::vector<AdviceCondition> policy_gate(DomainClass domain) {
    if (domain == DomainClass::HighStakes)
        return {AdviceCondition::ScaffoldedFriction};
    return {AdviceCondition::FrictionlessConsensus};
}

// Throws with the domain rationale when the condition is not allowed.
inline void enforce_policy(DomainClass domain, AdviceCondition condition) {
    const auto allowed = policy_gate(domain);
    for (AdviceCondition c : allowed)
        if (c == condition) return;
    std::string rationale;
    if (domain == DomainClass::HighStakes) {
        rationale = "high-stakes sensemaking requires structured machine disagreement; "
                    "a fluent consensus feed invites unchecked automation bias";
    } else if (domain == DomainClass::TimeCritical) {
        rationale = "time-critical operation cannot absorb injected debate; added "
                    "friction here costs response time with no human override window";
    } else {
        rationale = "low-risk retrieval does not justify injected debate; friction "
                    "here is pure usability cost";
    }
    throw PolicyViolationError(std::string("condition '") + condition_name(condition) +
                                   "' is not permitted in domain '" + domain_name(domain) +
                                   "'",
                               rationale);
}

} // namespace frictionlab
