#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "frictionlab/config.hpp"
#include "frictionlab/csv.hpp"
#include "frictionlab/ddm.hpp"
#include "frictionlab/errors.hpp"
#include "frictionlab/eval_space.hpp"
#include "frictionlab/friction.hpp"
#include "frictionlab/inference.hpp"
#include "frictionlab/parallel.hpp"
#include "frictionlab/phenotyping.hpp"
#include "frictionlab/rng.hpp"
#include "frictionlab/version.hpp"
#include "frictionlab/wiener.hpp"

namespace frictionlab {

// How a cell derives its friction level.
enum class CellKind : int { Consensus = 0, Debate = 1, DirectPhi = 2, Explanation = 3 };

inline const char* cell_kind_name(CellKind k) {
    switch (k) {
        case CellKind::Consensus: return "consensus";
        case CellKind::Debate: return "debate";
        case CellKind::DirectPhi: return "direct-phi";
        default: return "explanation";
    }
}

inline CellKind parse_cell_kind(const std::string& s) {
    if (s == "consensus") return CellKind::Consensus;
    if (s == "debate") return CellKind::Debate;
    if (s == "direct-phi") return CellKind::DirectPhi;
    if (s == "explanation") return CellKind::Explanation;
    throw SchemaError("unrecognized cell kind: " + s);
}

struct ExperimentConfig {
    std::string preset = "h1";  // h1 | h2 | h3
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials_per_cell = 0;  // 0 -> preset default

    UserProfile user;  // base profile; cells override wmc / expertise

    std::vector<double> pool_stance_means{0.85, 0.75, 0.65};
    double pool_concentration = 40.0;
    std::vector<std::string> pool_tags;  // empty -> fam-0..n-1
    int claims = 4;
    int granularity = 0;  // 0 -> all claim pairs

    double ai_correct_rate = 0.7;

    std::vector<double> phi_grid{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};  // h2
    std::vector<double> wmc_levels{0.3, 0.6, 0.9};               // h2
    std::vector<double> expertise_levels{0.2, 0.9};              // h3
    double xai_push = 1.0;                                       // h3 anchoring strength

    ModulationConfig modulation;
    DebateConfig debate;

    double w_bias = 0.5, w_speed = 0.25, w_gaze = 0.25;
    double fast_rt_percentile = 25.0;
    double fast_rt_cutoff = 0.0;  // 0 -> derive from baseline cell percentile

    double dependency = 0.9;
    double d_cut = 0.5, phi_cut = 0.5;

    int aoi_count = 4;
    int scanpath_length = 120;
    double dt = kDefaultDt;

    bool fit_enabled = false;
    int fit_warmup = 1000;
    int fit_samples = 2000;

    std::optional<DomainClass> domain;

    // execution-only knobs; never echoed, never part of run identity
    unsigned threads = 1;
    std::string out_dir;

    int resolved_trials_per_cell() const {
        if (trials_per_cell > 0) return trials_per_cell;
        if (preset == "h2") return 30000;
        if (preset == "h3") return 10000;
        return 2000;
    }

    std::vector<AgentSpec> agent_pool() const {
        std::vector<AgentSpec> pool;
        for (std::size_t i = 0; i < pool_stance_means.size(); ++i) {
            AgentSpec a;
            a.stance_mean = pool_stance_means[i];
            a.stance_concentration = pool_concentration;
            a.heterogeneity_tag =
                i < pool_tags.size() ? pool_tags[i] : "fam-" + std::to_string(i);
            pool.push_back(std::move(a));
        }
        return pool;
    }

    AgencyWeights agency_weights() const {
        AgencyWeights w;
        w.w_bias = w_bias;
        w.w_speed = w_speed;
        w.w_gaze = w_gaze;
        w.fast_rt_cutoff = fast_rt_cutoff > 0.0 ? fast_rt_cutoff : 0.5;
        w.aoi_count = aoi_count;
        return w;
    }

    void validate() const {
        if (!seed_set) throw ConfigError("seed is mandatory (set seed= or pass --seed)");
        if (preset != "h1" && preset != "h2" && preset != "h3")
            throw ConfigError("preset must be one of h1, h2, h3");
        if (resolved_trials_per_cell() < 100)
            throw ConfigError("presets require trials_per_cell >= 100");
        user.validate();
        if (pool_stance_means.size() < 2) throw ConfigError("agent pool needs >= 2 agents");
        if (claims < 1) throw ConfigError("claims must be >= 1");
        if (ai_correct_rate < 0.0 || ai_correct_rate > 1.0)
            throw ConfigError("ai.correct_rate must lie in [0, 1]");
        if (aoi_count < 3) throw ConfigError("telemetry.aoi_count must be >= 3");
        if (scanpath_length < 20) throw ConfigError("telemetry.scanpath_length must be >= 20");
        if (preset == "h2") {
            if (phi_grid.size() < 5)
                throw ConfigError("h2 needs a phi grid of >= 5 points");
            if (wmc_levels.size() < 2) throw ConfigError("h2 needs >= 2 wmc levels");
            if (!std::is_sorted(phi_grid.begin(), phi_grid.end()) ||
                !std::is_sorted(wmc_levels.begin(), wmc_levels.end()))
                throw ConfigError("h2 grids must be sorted ascending");
        }
        if (preset == "h3") {
            if (expertise_levels.size() != 2)
                throw ConfigError("h3 needs exactly two expertise levels (novice, expert)");
        }
    }

    static ExperimentConfig from_kv(const KeyValueConfig& kv);
    KeyValueConfig to_kv() const;
};

inline ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
    ExperimentConfig c;
    c.preset = kv.get_string("preset", c.preset);
    if (kv.has("seed")) {
        c.seed = kv.get_u64("seed", 0);
        c.seed_set = true;
    }
    c.trials_per_cell = static_cast<int>(kv.get_int("trials_per_cell", c.trials_per_cell));
    c.user.wmc = kv.get_double("user.wmc", c.user.wmc);
    c.user.expertise = kv.get_double("user.expertise", c.preset == "h1" ? 0.5 : 0.2);
    c.user.beta0 = kv.get_double("user.beta0", c.user.beta0);
    c.user.v_base = kv.get_double("user.v_base", c.user.v_base);
    c.pool_stance_means = kv.get_double_list("pool.stance_means", c.pool_stance_means);
    c.pool_concentration = kv.get_double("pool.concentration", c.pool_concentration);
    c.pool_tags = kv.get_string_list("pool.tags", c.pool_tags);
    c.claims = static_cast<int>(kv.get_int("claims", c.claims));
    c.granularity = static_cast<int>(kv.get_int("granularity", c.granularity));
    c.ai_correct_rate = kv.get_double("ai.correct_rate", c.ai_correct_rate);
    c.phi_grid = kv.get_double_list("grid.phi", c.phi_grid);
    c.wmc_levels = kv.get_double_list("grid.wmc", c.wmc_levels);
    c.expertise_levels = kv.get_double_list("h3.expertise_levels", c.expertise_levels);
    c.xai_push = kv.get_double("h3.xai_push", c.xai_push);
    c.modulation.k_novice = kv.get_double("modulation.k_novice", c.modulation.k_novice);
    c.modulation.c_shock = kv.get_double("modulation.c_shock", c.modulation.c_shock);
    c.modulation.a = kv.get_double("modulation.a", c.modulation.a);
    c.modulation.sigma = kv.get_double("modulation.sigma", c.modulation.sigma);
    c.modulation.t0 = kv.get_double("modulation.t0", c.modulation.t0);
    c.w_bias = kv.get_double("metrics.w_bias", c.w_bias);
    c.w_speed = kv.get_double("metrics.w_speed", c.w_speed);
    c.w_gaze = kv.get_double("metrics.w_gaze", c.w_gaze);
    c.fast_rt_percentile = kv.get_double("metrics.fast_rt_percentile", c.fast_rt_percentile);
    c.fast_rt_cutoff = kv.get_double("metrics.fast_rt_cutoff", c.fast_rt_cutoff);
    c.dependency = kv.get_double("eval.dependency", c.dependency);
    c.d_cut = kv.get_double("eval.d_cut", c.d_cut);
    c.phi_cut = kv.get_double("eval.phi_cut", c.phi_cut);
    c.aoi_count = static_cast<int>(kv.get_int("telemetry.aoi_count", c.aoi_count));
    c.scanpath_length =
        static_cast<int>(kv.get_int("telemetry.scanpath_length", c.scanpath_length));
    c.dt = kv.get_double("sim.dt", c.dt);
    c.fit_enabled = kv.get_bool("fit.enabled", c.fit_enabled);
    c.fit_warmup = static_cast<int>(kv.get_int("fit.warmup", c.fit_warmup));
    c.fit_samples = static_cast<int>(kv.get_int("fit.samples", c.fit_samples));
    if (kv.has("domain")) c.domain = parse_domain(kv.require_string("domain"));
    return c;
}

inline KeyValueConfig ExperimentConfig::to_kv() const {
    KeyValueConfig kv;
    auto put_d = [&](const std::string& k, double v) { kv.set(k, fmt_double(v)); };
    auto put_list = [&](const std::string& k, const std::vector<double>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) s += ",";
            s += fmt_double(xs[i]);
        }
        kv.set(k, s);
    };
    kv.set("preset", preset);
    kv.set("seed", fmt_u64(seed));
    kv.set("trials_per_cell", std::to_string(resolved_trials_per_cell()));
    put_d("user.wmc", user.wmc);
    put_d("user.expertise", user.expertise);
    put_d("user.beta0", user.beta0);
    put_d("user.v_base", user.v_base);
    put_list("pool.stance_means", pool_stance_means);
    put_d("pool.concentration", pool_concentration);
    {
        std::string tags;
        const auto pool = agent_pool();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (i) tags += ",";
            tags += pool[i].heterogeneity_tag;
        }
        kv.set("pool.tags", tags);
    }
    kv.set("claims", std::to_string(claims));
    kv.set("granularity", std::to_string(granularity));
    put_d("ai.correct_rate", ai_correct_rate);
    put_list("grid.phi", phi_grid);
    put_list("grid.wmc", wmc_levels);
    put_list("h3.expertise_levels", expertise_levels);
    put_d("h3.xai_push", xai_push);
    put_d("modulation.k_novice", modulation.k_novice);
    put_d("modulation.c_shock", modulation.c_shock);
    put_d("modulation.a", modulation.a);
    put_d("modulation.sigma", modulation.sigma);
    put_d("modulation.t0", modulation.t0);
    put_d("metrics.w_bias", w_bias);
    put_d("metrics.w_speed", w_speed);
    put_d("metrics.w_gaze", w_gaze);
    put_d("metrics.fast_rt_percentile", fast_rt_percentile);
    put_d("metrics.fast_rt_cutoff", fast_rt_cutoff);
    put_d("eval.dependency", dependency);
    put_d("eval.d_cut", d_cut);
    put_d("eval.phi_cut", phi_cut);
    kv.set("telemetry.aoi_count", std::to_string(aoi_count));
    kv.set("telemetry.scanpath_length", std::to_string(scanpath_length));
    put_d("sim.dt", dt);
    kv.set("fit.enabled", fit_enabled ? "true" : "false");
    kv.set("fit.warmup", std::to_string(fit_warmup));
    kv.set("fit.samples", std::to_string(fit_samples));
    if (domain) kv.set("domain", domain_name(*domain));
    return kv;
}

// ---------------------------------------------------------------------------
// Cells and rows
// ---------------------------------------------------------------------------

struct CellSpec {
    std::string label;
    CellKind kind = CellKind::Consensus;
    double phi_nominal = 0.0;  // used by DirectPhi cells
    double wmc = 0.6;
    double expertise = 0.5;
};

struct TrialRow {
    std::uint64_t trial_id = 0;
    std::string condition;
    double phi = 0.0;
    Choice choice = Choice::Reject;
    double rt = 0.0;
    bool ai_correct = false;
    double gte = 0.0;
    double pupil = 0.0;
    double pfc = 0.0;
    int g = 0;
};

inline const std::vector<std::string> kTrialCsvHeader = {
    "trial_id", "condition", "phi", "choice", "rt",
    "ai_correct", "gte", "pupil", "pfc", "g"};

struct CellResult {
    CellSpec spec;
    std::size_t trials = 0;
    AgencyMetrics metrics;
    double mean_phi = 0.0;
    double mean_pupil = 0.0;
    double mean_pfc = 0.0;
    double mean_confidence = 0.0;  // mean start-bias extremity max(beta, 1-beta)
    bool shock_triggered = false;
    Quadrant quadrant = Quadrant::LowDependencyLowFriction;
    std::optional<SubjectPosterior> posterior;
};

struct Verdicts {
    bool pass = false;
    // check name -> "pass" | "fail" | "indistinguishable"
    std::map<std::string, std::string> checks;
    std::vector<std::string> notes;
};

struct RunSummary {
    std::string preset;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config_echo;
    std::vector<CellResult> cells;
    Verdicts verdicts;
    double wall_ms = 0.0;  // console-only; never serialized
};

struct RunOutput {
    RunSummary summary;
    std::vector<TrialRow> rows;
};

namespace detail {

inline std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

} // namespace detail

inline std::vector<CellSpec> build_cells(const ExperimentConfig& cfg) {
    std::vector<CellSpec> cells;
    if (cfg.preset == "h1") {
        cells.push_back({"consensus", CellKind::Consensus, 0.0, cfg.user.wmc,
                         cfg.user.expertise});
        cells.push_back({"friction", CellKind::Debate, 0.0, cfg.user.wmc,
                         cfg.user.expertise});
    } else if (cfg.preset == "h2") {
        for (double wmc : cfg.wmc_levels) {
            for (double phi : cfg.phi_grid) {
                CellSpec spec;
                spec.label = "phi" + detail::short_num(phi) + "_wmc" + detail::short_num(wmc);
                spec.kind = CellKind::DirectPhi;
                spec.phi_nominal = phi;
                spec.wmc = wmc;
                spec.expertise = cfg.user.expertise;
                cells.push_back(std::move(spec));
            }
        }
    } else {  // h3
        std::vector<double> levels = cfg.expertise_levels;
        std::sort(levels.begin(), levels.end());
        for (double e : levels) {
            cells.push_back({"explanation_e" + detail::short_num(e), CellKind::Explanation,
                             0.0, cfg.user.wmc, e});
            cells.push_back({"friction_e" + detail::short_num(e), CellKind::Debate, 0.0,
                             cfg.user.wmc, e});
        }
    }
    return cells;
}

// Start bias for a cell at the given friction level; the explanation cells
// add the fluency-driven anchoring push toward accept, scaled by how much
// the user lacks expertise.
inline double modulated_start_beta(const ExperimentConfig& cfg, const CellSpec& cell,
                                   double phi) {
    UserProfile user = cfg.user;
    user.wmc = cell.wmc;
    user.expertise = cell.expertise;
    const DdmParams base = modulate_params(user, FrictionProfile{phi}, cfg.modulation);
    double beta = base.beta();
    if (cell.kind == CellKind::Explanation) {
        beta += (1.0 - beta) * cfg.xai_push * cfg.debate.consensus_fluency *
                (1.0 - cell.expertise);
        beta = std::min(beta, 1.0 - 1e-9);
    }
    return beta;
}

// One simulated decision episode. RNG lanes are keyed by the trial index
// only, not the cell, so every cell sees the same noise stream (common
// random numbers); differences between cells are then parameter-driven.
inline TrialRow simulate_cell_trial(const ExperimentConfig& cfg, const CellSpec& cell,
                                    std::size_t cell_index, std::size_t trial_index,
                                    const std::vector<AgentSpec>& pool,
                                    const EngagementModel& model) {
    Rng ai_rng = Rng::substream(cfg.seed, rng_lane::kAiLabel, trial_index);
    const bool ai_correct = ai_rng.bernoulli(cfg.ai_correct_rate);

    double phi = 0.0;
    int g = 0;
    if (cell.kind == CellKind::Debate) {
        Rng debate_rng = Rng::substream(cfg.seed, rng_lane::kDebate, trial_index);
        DebateConfig dc = cfg.debate;
        dc.granularity = cfg.granularity;
        const AdviceBundle bundle =
            run_debate(pool, cfg.claims, AdviceCondition::ScaffoldedFriction, debate_rng, dc);
        phi = effective_friction(bundle).phi;
        g = bundle.disagreement->granularity;
    } else if (cell.kind == CellKind::DirectPhi) {
        phi = cell.phi_nominal;
    }

    UserProfile user = cfg.user;
    user.wmc = cell.wmc;
    user.expertise = cell.expertise;
    DdmParams params = modulate_params(user, FrictionProfile{phi}, cfg.modulation);
    const double beta = modulated_start_beta(cfg, cell, phi);
    params.z = beta * params.a;
    // drift magnitude points toward the factually correct decision
    params.v = ai_correct ? params.v : -params.v;

    Rng trial_rng = Rng::substream(cfg.seed, rng_lane::kTrial, trial_index);
    const TrialRecord rec = simulate_trial(params, cfg.dt, trial_rng);

    EngagementState state;
    if (phi <= 0.0)
        state = EngagementState::HeuristicAcceptance;
    else if (phi > cell.wmc)
        state = EngagementState::Confusion;
    else
        state = EngagementState::AnalyticalEffort;

    Rng scan_rng = Rng::substream(cfg.seed, rng_lane::kScanpath, trial_index);
    const Scanpath path = generate_scanpath(state, cfg.aoi_count,
                                            static_cast<std::size_t>(cfg.scanpath_length),
                                            scan_rng, model);
    Rng autonomic_rng = Rng::substream(cfg.seed, rng_lane::kAutonomic, trial_index);
    const AutonomicSample aut = generate_autonomic(state, autonomic_rng, model);

    TrialRow row;
    row.trial_id = cell_index * static_cast<std::size_t>(cfg.resolved_trials_per_cell()) +
                   trial_index;
    row.condition = cell.label;
    row.phi = phi;
    row.choice = rec.choice;
    row.rt = rec.rt;
    row.ai_correct = ai_correct;
    row.gte = gaze_transition_entropy(transition_matrix(path, 0.5));
    row.pupil = aut.pupil_dilation;
    row.pfc = aut.pfc_activation;
    row.g = g;
    return row;
}

inline CellResult aggregate_cell(const ExperimentConfig& cfg, const CellSpec& cell,
                                 const std::vector<TrialRow>& rows, std::size_t offset,
                                 std::size_t count, const AgencyWeights& weights) {
    CellResult res;
    res.spec = cell;
    res.trials = count;
    std::vector<TrialObservation> obs;
    obs.reserve(count);
    double phi_sum = 0.0, pupil_sum = 0.0, pfc_sum = 0.0, conf_sum = 0.0;
    for (std::size_t i = offset; i < offset + count; ++i) {
        const TrialRow& r = rows[i];
        obs.push_back(TrialObservation{r.choice, r.rt, r.ai_correct, r.gte});
        phi_sum += r.phi;
        pupil_sum += r.pupil;
        pfc_sum += r.pfc;
        const double beta = modulated_start_beta(cfg, cell, r.phi);
        conf_sum += std::max(beta, 1.0 - beta);
        if (r.phi > cell.wmc) res.shock_triggered = true;
    }
    res.metrics = compute_agency_metrics(obs, weights);
    const double n = static_cast<double>(count);
    res.mean_phi = phi_sum / n;
    res.mean_pupil = pupil_sum / n;
    res.mean_pfc = pfc_sum / n;
    res.mean_confidence = conf_sum / n;
    res.quadrant = classify_quadrant(EvalPoint{cfg.dependency, std::min(1.0, res.mean_phi)},
                                     cfg.d_cut, cfg.phi_cut);
    return res;
}

inline Verdicts compute_verdicts(const ExperimentConfig& cfg,
                                 const std::vector<CellResult>& cells) {
    Verdicts v;
    auto mark = [&](const std::string& name, bool ok) {
        v.checks[name] = ok ? "pass" : "fail";
    };
    if (cfg.preset == "h1") {
        const CellResult& cons = cells.at(0);
        const CellResult& fric = cells.at(1);
        mark("surrender_lower", fric.metrics.surrender_index < cons.metrics.surrender_index);
        mark("gte_higher", fric.metrics.mean_gte > cons.metrics.mean_gte);
        mark("pupil_higher", fric.mean_pupil > cons.mean_pupil);
        mark("pfc_higher", fric.mean_pfc > cons.mean_pfc);
        v.notes.push_back("pupil/pfc/gte are simulated mediators, not physiological data");
    } else if (cfg.preset == "h2") {
        const std::size_t np = cfg.phi_grid.size();
        std::vector<std::size_t> argmaxes;
        for (std::size_t wi = 0; wi < cfg.wmc_levels.size(); ++wi) {
            std::size_t best = 0;
            bool shock_seen = false;
            for (std::size_t pi = 0; pi < np; ++pi) {
                const CellResult& c = cells.at(wi * np + pi);
                if (c.metrics.accuracy > cells.at(wi * np + best).metrics.accuracy) best = pi;
                shock_seen = shock_seen || c.shock_triggered;
            }
            const double acc_best = cells.at(wi * np + best).metrics.accuracy;
            const bool interior = best > 0 && best + 1 < np &&
                                  acc_best > cells.at(wi * np).metrics.accuracy &&
                                  acc_best > cells.at(wi * np + np - 1).metrics.accuracy;
            mark("interior_max_wmc" + detail::short_num(cfg.wmc_levels[wi]), interior);
            if (!shock_seen)
                v.notes.push_back("wmc " + detail::short_num(cfg.wmc_levels[wi]) +
                                  ": no shock cell ever triggered (monotone region only)");
            argmaxes.push_back(best);
        }
        bool nondecreasing = true;
        for (std::size_t i = 1; i < argmaxes.size(); ++i)
            if (cfg.phi_grid[argmaxes[i]] < cfg.phi_grid[argmaxes[i - 1]]) nondecreasing = false;
        mark("argmax_phi_nondecreasing", nondecreasing);
    } else {  // h3
        std::vector<double> levels = cfg.expertise_levels;
        std::sort(levels.begin(), levels.end());
        std::vector<double> reductions;
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const CellResult& expl = cells.at(2 * li);
            const CellResult& fric = cells.at(2 * li + 1);
            const double gap_expl = expl.mean_confidence - expl.metrics.accuracy;
            const double gap_fric = fric.mean_confidence - fric.metrics.accuracy;
            mark("gap_lower_e" + detail::short_num(levels[li]), gap_fric < gap_expl);
            reductions.push_back(gap_expl - gap_fric);
        }
        if (std::fabs(levels[0] - levels[1]) < 1e-12) {
            v.checks["novice_moderation"] = "indistinguishable";
            v.notes.push_back("expertise levels identical; moderation cannot be assessed");
        } else {
            mark("novice_moderation", reductions[0] > reductions[1]);
        }
    }
    v.pass = true;
    for (const auto& [name, state] : v.checks)
        if (state == "fail") v.pass = false;
    return v;
}

inline RunOutput run_experiment(const ExperimentConfig& cfg_in) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig cfg = cfg_in;
    cfg.validate();

    const std::vector<CellSpec> cells = build_cells(cfg);
    if (cfg.domain) {
        for (const CellSpec& cell : cells) {
            const bool frictional = cell.kind == CellKind::Debate ||
                                    (cell.kind == CellKind::DirectPhi && cell.phi_nominal > 0.0);
            enforce_policy(*cfg.domain, frictional ? AdviceCondition::ScaffoldedFriction
                                                   : AdviceCondition::FrictionlessConsensus);
        }
    }

    const std::size_t per_cell = static_cast<std::size_t>(cfg.resolved_trials_per_cell());
    const std::size_t total = cells.size() * per_cell;
    const std::vector<AgentSpec> pool = cfg.agent_pool();
    const EngagementModel model;

    std::vector<TrialRow> rows(total);
    parallel_for(total, cfg.threads, [&](std::size_t flat) {
        const std::size_t cell_index = flat / per_cell;
        const std::size_t trial_index = flat % per_cell;
        rows[flat] =
            simulate_cell_trial(cfg, cells[cell_index], cell_index, trial_index, pool, model);
    });

    // The fast-accept cutoff is an RT percentile of the baseline (first)
    // cell; resolving it once keeps every cell comparable and makes the
    // echoed value sufficient for bit-exact recomputation.
    if (!(cfg.fast_rt_cutoff > 0.0)) {
        std::vector<double> rts;
        rts.reserve(per_cell);
        for (std::size_t i = 0; i < per_cell; ++i) rts.push_back(rows[i].rt);
        cfg.fast_rt_cutoff = rt_percentile(std::move(rts), cfg.fast_rt_percentile);
    }
    const AgencyWeights weights = cfg.agency_weights();

    RunOutput out;
    out.summary.preset = cfg.preset;
    out.summary.seed = cfg.seed;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        CellResult res =
            aggregate_cell(cfg, cells[ci], rows, ci * per_cell, per_cell, weights);
        if (cfg.fit_enabled) {
            TrialSet set;
            set.params = DdmParams{0.0, cfg.modulation.a, 0.5 * cfg.modulation.a,
                                   cfg.modulation.sigma, cfg.modulation.t0};
            set.condition_id = cells[ci].label;
            set.seed = cfg.seed;
            for (std::size_t i = ci * per_cell; i < (ci + 1) * per_cell; ++i)
                set.trials.push_back(
                    TrialRecord{rows[i].choice, rows[i].rt, rows[i].ai_correct,
                                cells[ci].label, rows[i].trial_id});
            FitConfig fc;
            fc.warmup = cfg.fit_warmup;
            fc.samples = cfg.fit_samples;
            fc.seed = Rng::substream(cfg.seed, rng_lane::kChain, ci).next_u64();
            fc.fixed = FixedDdm{cfg.modulation.a, cfg.modulation.sigma, cfg.modulation.t0};
            SubjectPosterior post = fit_subject(set, Priors{}, fc);
            post.draws.clear();  // summaries only in the run record
            res.posterior = std::move(post);
        }
        out.summary.cells.push_back(std::move(res));
    }

    out.summary.verdicts = compute_verdicts(cfg, out.summary.cells);
    out.summary.config_echo = cfg.to_kv().entries();
    out.rows = std::move(rows);
    out.summary.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ParamSummary& s) {
    return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}, {"ci_lo", s.ci_lo}, {"ci_hi", s.ci_hi}};
}

inline nlohmann::json to_json(const AgencyMetrics& m) {
    return nlohmann::json{{"automation_bias_rate", m.automation_bias_rate},
                          {"accuracy", m.accuracy},
                          {"mean_rt", m.mean_rt},
                          {"mean_gte", m.mean_gte},
                          {"fast_accept_share", m.fast_accept_share},
                          {"surrender_index", m.surrender_index}};
}

inline nlohmann::json to_json(const CellResult& c) {
    nlohmann::json j{{"label", c.spec.label},
                     {"kind", cell_kind_name(c.spec.kind)},
                     {"phi_nominal", c.spec.phi_nominal},
                     {"wmc", c.spec.wmc},
                     {"expertise", c.spec.expertise},
                     {"trials", c.trials},
                     {"mean_phi", c.mean_phi},
                     {"mean_pupil", c.mean_pupil},
                     {"mean_pfc", c.mean_pfc},
                     {"mean_confidence", c.mean_confidence},
                     {"shock_triggered", c.shock_triggered},
                     {"quadrant", quadrant_name(c.quadrant)},
                     {"metrics", to_json(c.metrics)}};
    if (c.posterior) {
        j["posterior"] = nlohmann::json{{"v", to_json(c.posterior->v)},
                                        {"beta", to_json(c.posterior->beta)},
                                        {"acceptance_rate", c.posterior->acceptance_rate},
                                        {"ess_v", c.posterior->ess_v},
                                        {"ess_beta", c.posterior->ess_beta}};
    }
    return j;
}

inline nlohmann::json to_json(const RunSummary& s) {
    nlohmann::json cells = nlohmann::json::array();
    for (const CellResult& c : s.cells) cells.push_back(to_json(c));
    nlohmann::json checks(s.verdicts.checks);
    return nlohmann::json{{"artifact", kArtifactName},
                          {"version", kArtifactVersion},
                          {"preset", s.preset},
                          {"seed", s.seed},
                          {"rng_scheme", kRngSchemeDescription},
                          {"config", nlohmann::json(s.config_echo)},
                          {"cells", cells},
                          {"verdicts", nlohmann::json{{"pass", s.verdicts.pass},
                                                      {"checks", checks},
                                                      {"notes", s.verdicts.notes}}}};
}

inline std::string csv_metadata_line(std::uint64_t seed) {
    return std::string(kArtifactName) + " " + kArtifactVersion + " seed=" + fmt_u64(seed);
}

// Writes summary.json, trials.csv and the plot-data CSVs; returns the paths.
inline std::vector<std::string> report(const RunOutput& out, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory", out_dir);

    std::vector<std::string> written;
    const RunSummary& s = out.summary;
    const std::string meta = csv_metadata_line(s.seed);

    {
        const std::string path = out_dir + "/summary.json";
        std::ofstream js(path, std::ios::binary);
        if (!js) throw IoError("cannot open for writing", path);
        js << to_json(s).dump(2) << "\n";
        if (!js) throw IoError("write failed", path);
        written.push_back(path);
    }
    {
        const std::string path = out_dir + "/trials.csv";
        CsvWriter w(path, meta, kTrialCsvHeader);
        for (const TrialRow& r : out.rows) {
            w.write_row({fmt_u64(r.trial_id), r.condition, fmt_double(r.phi),
                         choice_name(r.choice), fmt_double(r.rt), r.ai_correct ? "1" : "0",
                         fmt_double(r.gte), fmt_double(r.pupil), fmt_double(r.pfc),
                         std::to_string(r.g)});
        }
        w.close();
        written.push_back(path);
    }
    {
        const std::string path = out_dir + "/accuracy_vs_phi.csv";
        CsvWriter w(path, meta, {"condition", "wmc", "phi", "accuracy"});
        for (const CellResult& c : s.cells)
            w.write_row({c.spec.label, fmt_double(c.spec.wmc), fmt_double(c.mean_phi),
                         fmt_double(c.metrics.accuracy)});
        w.close();
        written.push_back(path);
    }
    {
        const std::string path = out_dir + "/gte_by_condition.csv";
        CsvWriter w(path, meta, {"condition", "mean_gte", "mean_pupil", "mean_pfc"});
        for (const CellResult& c : s.cells)
            w.write_row({c.spec.label, fmt_double(c.metrics.mean_gte),
                         fmt_double(c.mean_pupil), fmt_double(c.mean_pfc)});
        w.close();
        written.push_back(path);
    }
    if (std::any_of(s.cells.begin(), s.cells.end(),
                    [](const CellResult& c) { return c.posterior.has_value(); })) {
        const std::string path = out_dir + "/posterior_intervals.csv";
        CsvWriter w(path, meta, {"condition", "param", "mean", "ci_lo", "ci_hi"});
        for (const CellResult& c : s.cells) {
            if (!c.posterior) continue;
            w.write_row({c.spec.label, "v", fmt_double(c.posterior->v.mean),
                         fmt_double(c.posterior->v.ci_lo), fmt_double(c.posterior->v.ci_hi)});
            w.write_row({c.spec.label, "beta", fmt_double(c.posterior->beta.mean),
                         fmt_double(c.posterior->beta.ci_lo),
                         fmt_double(c.posterior->beta.ci_hi)});
        }
        w.close();
        written.push_back(path);
    }
    return written;
}

// Rebuilds cell aggregates and verdicts from an emitted run directory.
// Returns the recomputed summary; `matches` reports whether the stored
// verdicts and per-cell metrics agree bit-for-bit with the recomputation.
struct RecomputeResult {
    RunSummary summary;
    bool matches = false;
    std::vector<std::string> mismatches;
};

inline RecomputeResult recompute_from_dir(const std::string& run_dir) {
    const std::string summary_path = run_dir + "/summary.json";
    std::ifstream in(summary_path, std::ios::binary);
    if (!in) throw IoError("cannot open run summary", summary_path);
    nlohmann::json stored;
    in >> stored;

    KeyValueConfig kv;
    for (const auto& [key, value] : stored.at("config").items())
        kv.set(key, value.get<std::string>());
    ExperimentConfig cfg = ExperimentConfig::from_kv(kv);
    cfg.validate();

    const CsvTable table = CsvTable::read_file(run_dir + "/trials.csv");
    const std::size_t col_cond = table.column("condition");
    const std::size_t col_phi = table.column("phi");
    const std::size_t col_choice = table.column("choice");
    const std::size_t col_rt = table.column("rt");
    const std::size_t col_ai = table.column("ai_correct");
    const std::size_t col_gte = table.column("gte");
    const std::size_t col_pupil = table.column("pupil");
    const std::size_t col_pfc = table.column("pfc");

    const std::vector<CellSpec> cells = build_cells(cfg);
    std::map<std::string, std::size_t> by_label;
    for (std::size_t i = 0; i < cells.size(); ++i) by_label[cells[i].label] = i;

    std::vector<std::vector<TrialRow>> cell_rows(cells.size());
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        auto it = by_label.find(table.cell(r, col_cond));
        if (it == by_label.end())
            throw SchemaError("trials.csv row references unknown condition '" +
                              table.cell(r, col_cond) + "'");
        TrialRow row;
        row.condition = table.cell(r, col_cond);
        row.phi = table.cell_double(r, col_phi);
        row.choice = parse_choice(table.cell(r, col_choice));
        row.rt = table.cell_double(r, col_rt);
        row.ai_correct = table.cell(r, col_ai) == "1";
        row.gte = table.cell_double(r, col_gte);
        row.pupil = table.cell_double(r, col_pupil);
        row.pfc = table.cell_double(r, col_pfc);
        cell_rows[it->second].push_back(std::move(row));
    }

    RecomputeResult res;
    res.summary.preset = cfg.preset;
    res.summary.seed = cfg.seed;
    res.summary.config_echo = cfg.to_kv().entries();
    const AgencyWeights weights = cfg.agency_weights();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        if (cell_rows[ci].empty())
            throw SchemaError("trials.csv has no rows for condition '" + cells[ci].label + "'");
        res.summary.cells.push_back(aggregate_cell(cfg, cells[ci], cell_rows[ci], 0,
                                                   cell_rows[ci].size(), weights));
    }
    res.summary.verdicts = compute_verdicts(cfg, res.summary.cells);

    res.matches = true;
    const nlohmann::json recomputed = to_json(res.summary);
    const auto& stored_verdicts = stored.at("verdicts");
    if (stored_verdicts != recomputed.at("verdicts")) {
        res.matches = false;
        res.mismatches.push_back("verdicts differ from stored summary");
    }
    const auto& stored_cells = stored.at("cells");
    for (std::size_t ci = 0; ci < res.summary.cells.size(); ++ci) {
        nlohmann::json recomputed_cell = to_json(res.summary.cells[ci]);
        nlohmann::json stored_cell = stored_cells.at(ci);
        stored_cell.erase("posterior");
        recomputed_cell.erase("posterior");
        if (stored_cell != recomputed_cell) {
            res.matches = false;
            res.mismatches.push_back("cell '" + res.summary.cells[ci].spec.label +
                                     "' metrics differ from stored summary");
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Raw trial-set serialization (the `simulate` / `fit` CLI surface)
// ---------------------------------------------------------------------------

inline void write_trialset_csv(const TrialSet& set, const std::string& path) {
    CsvWriter w(path, csv_metadata_line(set.seed),
                {"trial_id", "condition", "choice", "rt", "ai_correct", "seed_path"});
    for (std::size_t i = 0; i < set.trials.size(); ++i) {
        const TrialRecord& t = set.trials[i];
        w.write_row({fmt_u64(i), t.condition_id, choice_name(t.choice), fmt_double(t.rt),
                     t.ai_correct ? "1" : "0", fmt_u64(t.seed_path)});
    }
    w.close();
}

// Reads any CSV that carries `choice` and `rt` columns (both the raw
// trial-set schema and the experiment trials.csv qualify).
inline TrialSet read_trials_csv(const std::string& path) {
    const CsvTable table = CsvTable::read_file(path);
    const std::size_t col_choice = table.column("choice");
    const std::size_t col_rt = table.column("rt");
    const bool has_ai = table.has_column("ai_correct");
    TrialSet set;
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        TrialRecord rec;
        rec.choice = parse_choice(table.cell(r, col_choice));
        rec.rt = table.cell_double(r, col_rt);
        if (has_ai) rec.ai_correct = table.cell(r, table.column("ai_correct")) == "1";
        rec.seed_path = r;
        set.trials.push_back(std::move(rec));
    }
    return set;
}

inline nlohmann::json to_json(const SubjectPosterior& p) {
    return nlohmann::json{{"artifact", kArtifactName},
                          {"version", kArtifactVersion},
                          {"seed", p.seed},
                          {"v", to_json(p.v)},
                          {"beta", to_json(p.beta)},
                          {"diagnostics",
                           nlohmann::json{{"acceptance_rate", p.acceptance_rate},
                                          {"ess_v", p.ess_v},
                                          {"ess_beta", p.ess_beta},
                                          {"samples", p.draws.size()}}}};
}

inline void write_chains_csv(const SubjectPosterior& p, const std::string& path) {
    CsvWriter w(path, csv_metadata_line(p.seed),
                {"chain", "iteration", "v", "beta", "log_posterior"});
    for (std::size_t i = 0; i < p.draws.size(); ++i) {
        const PosteriorDraw& d = p.draws[i];
        w.write_row({"0", fmt_u64(i), fmt_double(d.v), fmt_double(d.beta),
                     fmt_double(d.log_post)});
    }
    w.close();
}

} // namespace frictionlab
